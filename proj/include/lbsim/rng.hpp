#pragma once

#include <cstdint>
#include <cmath>

namespace lbsim {

// Deterministic splitmix64 stream. One instance per consumer (workload,
// hashing salt, DRILL sampling, ECN marking, ...) so adding draws in one
// subsystem never perturbs another. Same (seed, stream_id) -> same sequence
// on every platform.
class SeededRng {
public:
    SeededRng() : state_(mix(0x9e3779b97f4a7c15ull)) {}
    SeededRng(std::uint64_t seed, std::uint64_t stream_id)
        : state_(mix(mix(seed + 0x9e3779b97f4a7c15ull) ^ mix(stream_id + 0xbf58476d1ce4e5b9ull))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // Uniform in [0, n) via 128-bit multiply (no modulo bias worth caring
    // about for n far below 2^64, and fully deterministic).
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Exponential with the given rate (events per second), in nanoseconds.
    std::uint64_t next_exp_ns(double rate_per_sec) {
        double u = next_double();
        while (u <= 0.0) u = next_double();
        double dt_sec = -std::log(u) / rate_per_sec;
        return static_cast<std::uint64_t>(dt_sec * 1e9);
    }

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

private:
    std::uint64_t state_;
};

// RNG stream ids, one per consumer.
namespace rng_stream {
constexpr std::uint64_t kWorkload = 1;
constexpr std::uint64_t kEcmpSalt = 2;
constexpr std::uint64_t kDrill = 3;
constexpr std::uint64_t kMarking = 4;
constexpr std::uint64_t kLetflow = 5;
constexpr std::uint64_t kPairing = 6;
} // namespace rng_stream

} // namespace lbsim
