#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "expectiles/core.hpp"

namespace expectiles {

// ============================================================================
// Canonical JSON emission
// ============================================================================
//
// Machine-readable output must be byte-stable: object keys sorted, doubles
// printed with 17 significant digits. nlohmann is used for parsing only; the
// emitter below is the single source of output bytes.

namespace jout {

struct Value {
    using Array = std::vector<Value>;
    using Object = std::map<std::string, Value>;
    std::variant<std::nullptr_t, bool, std::int64_t, double, std::string, Array, Object> v =
        nullptr;

    Value() = default;
    Value(std::nullptr_t) : v(nullptr) {}
    Value(bool b) : v(b) {}
    Value(int i) : v(static_cast<std::int64_t>(i)) {}
    Value(std::int64_t i) : v(i) {}
    Value(std::uint64_t i) : v(static_cast<std::int64_t>(i)) {}
    Value(double d) : v(d) {}
    Value(const char* s) : v(std::string(s)) {}
    Value(std::string s) : v(std::move(s)) {}
    Value(Array a) : v(std::move(a)) {}
    Value(Object o) : v(std::move(o)) {}

    Value& operator[](const std::string& key) {
        if (!std::holds_alternative<Object>(v)) v = Object{};
        return std::get<Object>(v)[key];
    }
    void push_back(Value item) {
        if (!std::holds_alternative<Array>(v)) v = Array{};
        std::get<Array>(v).push_back(std::move(item));
    }
};

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline void escape_to(const std::string& s, std::string& out) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

inline void dump_to(const Value& value, std::string& out) {
    if (std::holds_alternative<std::nullptr_t>(value.v)) {
        out += "null";
    } else if (std::holds_alternative<bool>(value.v)) {
        out += std::get<bool>(value.v) ? "true" : "false";
    } else if (std::holds_alternative<std::int64_t>(value.v)) {
        out += std::to_string(std::get<std::int64_t>(value.v));
    } else if (std::holds_alternative<double>(value.v)) {
        out += format_double(std::get<double>(value.v));
    } else if (std::holds_alternative<std::string>(value.v)) {
        escape_to(std::get<std::string>(value.v), out);
    } else if (std::holds_alternative<Value::Array>(value.v)) {
        out += '[';
        const auto& arr = std::get<Value::Array>(value.v);
        for (std::size_t i = 0; i < arr.size(); ++i) {
            if (i) out += ',';
            dump_to(arr[i], out);
        }
        out += ']';
    } else {
        out += '{';
        const auto& obj = std::get<Value::Object>(value.v);
        bool first = true;
        for (const auto& [k, item] : obj) {
            if (!first) out += ',';
            first = false;
            escape_to(k, out);
            out += ':';
            dump_to(item, out);
        }
        out += '}';
    }
}

inline std::string dump(const Value& value) {
    std::string out;
    dump_to(value, out);
    out += '\n';
    return out;
}

inline Value from_doubles(const std::vector<double>& xs) {
    Value::Array a;
    a.reserve(xs.size());
    for (double x : xs) a.emplace_back(x);
    return Value(std::move(a));
}

inline Value from_strings(const std::vector<std::string>& xs) {
    Value::Array a;
    a.reserve(xs.size());
    for (const auto& x : xs) a.emplace_back(x);
    return Value(std::move(a));
}

} // namespace jout

// ============================================================================
// Input documents
// ============================================================================

/// One act of an input document: either utils (evaluable directly) or outcome
/// labels (needs the agent's utility table).
struct NamedAct {
    std::string name;
    std::optional<std::vector<double>> utils;
    std::optional<std::vector<std::string>> outcomes;
};

struct Document {
    SpacePtr space;
    std::vector<NamedAct> acts;
    std::optional<Agent> agent;
};

namespace detail {

[[noreturn]] inline void input_error(const std::string& path, const std::string& what) {
    throw std::invalid_argument(path + ": " + what);
}

inline double number_at(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) input_error(path, "expected a number");
    return j.get<double>();
}

inline std::string string_at(const nlohmann::json& j, const std::string& path) {
    if (!j.is_string()) input_error(path, "expected a string");
    return j.get<std::string>();
}

} // namespace detail

/// Parses the single-document JSON input format:
///   {"space": {"states": [{"label": "...", "prob": ...}, ...]},
///    "acts": [{"name": "...", "utils": [...] | "outcomes": [...]}, ...],
///    "agent": {"beta": ..., "utility": {"label": util, ...}}}
/// Validation failures carry the offending field path.
inline Document parse_document(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("input is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) detail::input_error("$", "top level must be an object");

    Document doc;

    if (!j.contains("space")) detail::input_error("space", "missing section");
    const auto& jspace = j.at("space");
    if (!jspace.is_object() || !jspace.contains("states"))
        detail::input_error("space.states", "missing state list");
    const auto& jstates = jspace.at("states");
    if (!jstates.is_array() || jstates.empty())
        detail::input_error("space.states", "expected a nonempty array");
    std::vector<std::string> labels;
    std::vector<double> probs;
    for (std::size_t i = 0; i < jstates.size(); ++i) {
        const std::string path = "space.states[" + std::to_string(i) + "]";
        const auto& js = jstates.at(i);
        if (!js.is_object()) detail::input_error(path, "expected an object");
        if (!js.contains("label")) detail::input_error(path + ".label", "missing");
        if (!js.contains("prob")) detail::input_error(path + ".prob", "missing");
        labels.push_back(detail::string_at(js.at("label"), path + ".label"));
        probs.push_back(detail::number_at(js.at("prob"), path + ".prob"));
    }
    try {
        doc.space = FiniteSpace::create(std::move(labels), std::move(probs));
    } catch (const std::invalid_argument& e) {
        detail::input_error("space.states", e.what());
    }

    if (j.contains("acts")) {
        const auto& jacts = j.at("acts");
        if (!jacts.is_array()) detail::input_error("acts", "expected an array");
        for (std::size_t i = 0; i < jacts.size(); ++i) {
            const std::string path = "acts[" + std::to_string(i) + "]";
            const auto& ja = jacts.at(i);
            if (!ja.is_object()) detail::input_error(path, "expected an object");
            NamedAct act;
            if (!ja.contains("name")) detail::input_error(path + ".name", "missing");
            act.name = detail::string_at(ja.at("name"), path + ".name");
            const bool has_utils = ja.contains("utils");
            const bool has_outcomes = ja.contains("outcomes");
            if (has_utils == has_outcomes)
                detail::input_error(path, "need exactly one of 'utils' or 'outcomes'");
            if (has_utils) {
                const auto& ju = ja.at("utils");
                if (!ju.is_array()) detail::input_error(path + ".utils", "expected an array");
                std::vector<double> utils;
                for (std::size_t k = 0; k < ju.size(); ++k)
                    utils.push_back(detail::number_at(
                        ju.at(k), path + ".utils[" + std::to_string(k) + "]"));
                if (utils.size() != doc.space->size())
                    detail::input_error(path + ".utils", "length does not match state count");
                act.utils = std::move(utils);
            } else {
                const auto& jo = ja.at("outcomes");
                if (!jo.is_array())
                    detail::input_error(path + ".outcomes", "expected an array");
                std::vector<std::string> outcomes;
                for (std::size_t k = 0; k < jo.size(); ++k)
                    outcomes.push_back(detail::string_at(
                        jo.at(k), path + ".outcomes[" + std::to_string(k) + "]"));
                if (outcomes.size() != doc.space->size())
                    detail::input_error(path + ".outcomes",
                                        "length does not match state count");
                act.outcomes = std::move(outcomes);
            }
            doc.acts.push_back(std::move(act));
        }
    }

    if (j.contains("agent")) {
        const auto& ja = j.at("agent");
        if (!ja.is_object()) detail::input_error("agent", "expected an object");
        if (!ja.contains("beta")) detail::input_error("agent.beta", "missing");
        const double beta = detail::number_at(ja.at("beta"), "agent.beta");
        std::map<std::string, double> table;
        if (ja.contains("utility")) {
            const auto& jt = ja.at("utility");
            if (!jt.is_object()) detail::input_error("agent.utility", "expected an object");
            for (const auto& [label, ju] : jt.items())
                table[label] = detail::number_at(ju, "agent.utility." + label);
        }
        try {
            doc.agent.emplace(beta, std::move(table));
        } catch (const std::invalid_argument& e) {
            detail::input_error("agent", e.what());
        }
    }
    return doc;
}

/// Canonical serialization; parse_document(serialize_document(d)) reproduces
/// d field for field (doubles survive via 17 significant digits).
inline std::string serialize_document(const Document& doc) {
    jout::Value root;
    jout::Value::Array states;
    for (std::size_t i = 0; i < doc.space->size(); ++i) {
        jout::Value s;
        s["label"] = doc.space->label(i);
        s["prob"] = doc.space->prob(i);
        states.push_back(std::move(s));
    }
    root["space"]["states"] = jout::Value(std::move(states));

    jout::Value::Array acts;
    for (const NamedAct& act : doc.acts) {
        jout::Value a;
        a["name"] = act.name;
        if (act.utils) a["utils"] = jout::from_doubles(*act.utils);
        if (act.outcomes) a["outcomes"] = jout::from_strings(*act.outcomes);
        acts.push_back(std::move(a));
    }
    root["acts"] = jout::Value(std::move(acts));

    if (doc.agent) {
        jout::Value a;
        a["beta"] = doc.agent->beta();
        jout::Value table;
        table.v = jout::Value::Object{};
        for (const auto& [label, u] : doc.agent->utility_table()) table[label] = u;
        a["utility"] = std::move(table);
        root["agent"] = std::move(a);
    }
    return jout::dump(root);
}

// ============================================================================
// CSV ingestion
// ============================================================================

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        std::size_t start = 0;
        while (start < cell.size() && cell[start] == ' ') ++start;
        cells.push_back(cell.substr(start));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

} // namespace detail

/// Acts-only CSV: header "state,<act>,<act>,...", one row per state with the
/// state label first and utils after. States get uniform probabilities.
inline Document parse_csv_acts(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(ss, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        rows.push_back(detail::split_csv_line(line));
    }
    if (rows.size() < 2) detail::input_error("csv", "need a header row and at least one state");
    const std::vector<std::string>& header = rows.front();
    if (header.size() < 2) detail::input_error("csv", "need at least one act column");

    const std::size_t n_states = rows.size() - 1;
    const std::size_t n_acts = header.size() - 1;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> columns(n_acts, std::vector<double>(n_states));
    for (std::size_t r = 0; r < n_states; ++r) {
        const auto& row = rows[r + 1];
        if (row.size() != header.size())
            detail::input_error("csv row " + std::to_string(r + 2),
                                "expected " + std::to_string(header.size()) + " cells");
        labels.push_back(row[0]);
        for (std::size_t c = 0; c < n_acts; ++c) {
            try {
                std::size_t used = 0;
                columns[c][r] = std::stod(row[c + 1], &used);
                if (used != row[c + 1].size()) throw std::invalid_argument("trailing text");
            } catch (const std::exception&) {
                detail::input_error("csv row " + std::to_string(r + 2) + " column " +
                                        std::to_string(c + 2),
                                    "'" + row[c + 1] + "' is not a number");
            }
        }
    }

    Document doc;
    doc.space = FiniteSpace::create(
        std::move(labels), std::vector<double>(n_states, 1.0 / static_cast<double>(n_states)));
    for (std::size_t c = 0; c < n_acts; ++c)
        doc.acts.push_back({header[c + 1], std::move(columns[c]), std::nullopt});
    return doc;
}

/// Loads a document from disk, dispatching on the .csv extension.
inline Document load_document(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open input file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
        return parse_csv_acts(text);
    return parse_document(text);
}

/// Materializes a named act as a UtilityAct, applying the agent's table to
/// outcome-labelled acts.
inline UtilityAct resolve_act(const NamedAct& act, const SpacePtr& space,
                              const std::optional<Agent>& agent) {
    if (act.utils) return UtilityAct(space, *act.utils);
    if (!agent)
        throw std::invalid_argument("act '" + act.name +
                                    "' uses outcome labels but no agent utility table was given");
    return apply_utility(OutcomeAct(space, *act.outcomes), *agent);
}

} // namespace expectiles
