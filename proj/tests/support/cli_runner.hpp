#pragma once

// Spawns the built CLI binary and captures stdout + exit code.

#include <array>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <sys/wait.h>

namespace testsupport {

struct CliResult {
    int exit_code = -1;
    std::string output;
};

inline CliResult run_cli(const std::string& args, bool capture_stderr = false) {
    const std::string cmd = std::string(EXPECTILE_CLI_PATH) + " " + args +
                            (capture_stderr ? " 2>&1" : " 2>/dev/null");
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed for: " + cmd);
    CliResult result;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
        result.output.append(buf.data(), got);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

inline std::string write_temp_file(const std::string& name, const std::string& contents) {
    const std::string path = "/tmp/" + name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << contents;
    out.close();
    return path;
}

inline std::string data_file(const std::string& name) {
    return std::string(EXPECTILE_SOURCE_DIR) + "/data/" + name;
}

inline std::string golden_file(const std::string& name) {
    return std::string(EXPECTILE_SOURCE_DIR) + "/tests/golden/" + name;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
}

} // namespace testsupport
