#pragma once

#include <cstdint>

namespace lbsim {

// Simulation clock: integer nanoseconds since run start. No floating-point
// time anywhere so runs are bit-identical across platforms.
using SimTime = std::uint64_t;

constexpr SimTime kNsPerUs = 1000;
constexpr SimTime kNsPerMs = 1000 * 1000;
constexpr SimTime kNsPerSec = 1000ull * 1000 * 1000;

constexpr SimTime usec(std::uint64_t v) { return v * kNsPerUs; }
constexpr SimTime msec(std::uint64_t v) { return v * kNsPerMs; }
constexpr SimTime sec(std::uint64_t v) { return v * kNsPerSec; }

// Wire time of `bytes` at `bits_per_sec`, rounded up to the next nanosecond.
inline SimTime tx_time(std::uint64_t bytes, std::uint64_t bits_per_sec) {
    // bytes*8e9 can exceed 64 bits for GB-sized bursts; widen.
    unsigned __int128 bits = static_cast<unsigned __int128>(bytes) * 8u;
    unsigned __int128 num = bits * kNsPerSec + (bits_per_sec - 1);
    return static_cast<SimTime>(num / bits_per_sec);
}

constexpr std::uint64_t kGbps = 1000ull * 1000 * 1000;
constexpr std::uint64_t kMbps = 1000ull * 1000;

} // namespace lbsim
