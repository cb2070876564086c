#pragma once

#include <cstdint>
#include <random>

namespace expectiles {

// 64-bit finalizer used to derive independent substreams from a base seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seeded uniform generator. Wraps std::mt19937_64 but maps to doubles
/// directly, so streams do not depend on the standard library's
/// distribution implementations and replay identically everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Per-trial substream: trial i of a run seeded with s always sees the
    // same draws, regardless of how trials are scheduled.
    static Rng for_trial(std::uint64_t seed, std::uint64_t trial) {
        return Rng(splitmix64(seed ^ splitmix64(trial + 1)));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform index in {0, ..., n-1}. Modulo bias is irrelevant at desk scale.
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

    bool coin() { return (next_u64() & 1ull) != 0; }

private:
    std::mt19937_64 engine_;
};

} // namespace expectiles
