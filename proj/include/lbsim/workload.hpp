#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lbsim/rng.hpp"
#include "lbsim/time_types.hpp"
#include "lbsim/topology.hpp"

namespace lbsim {

// Piecewise-linear flow-size distribution: ordered (size, cumulative
// probability) points, probabilities strictly increasing to 1. Probability
// mass below the first point collapses onto the first size.
class FlowSizeCdf {
public:
    struct Point {
        std::uint64_t size_bytes;
        double cum_prob;
    };

    static FlowSizeCdf from_points(std::vector<Point> pts);
    // One "size_bytes cumulative_probability" pair per line; '#' comments.
    static FlowSizeCdf from_file(const std::string& path);

    std::uint64_t sample(SeededRng& rng) const;

    // Exact mean of the piecewise-linear inverse transform (trapezoid over
    // probability): mass p1 at s1, then segment means (s_i + s_{i+1})/2.
    double mean_bytes() const;

    const std::vector<Point>& points() const { return points_; }

private:
    std::vector<Point> points_;
};

enum class PairingMode : std::uint8_t { Random, Permutation, Incast };

struct TrafficSpec {
    double load_fraction = 0.0; // of aggregate host uplink capacity
    FlowSizeCdf cdf;            // used unless fixed_size_bytes > 0
    std::uint64_t fixed_size_bytes = 0;
    PairingMode pairing = PairingMode::Random;
    std::uint64_t seed = 1;
};

struct FlowArrival {
    SimTime time = 0;
    std::uint32_t src_host = 0;
    std::uint32_t dst_host = 0;
    std::uint64_t size_bytes = 0;
};

// Pure function of (spec, topology, horizon): Poisson arrivals at
// rate = load * num_hosts * host_link / mean_size, pairing per spec.
// Permutation pairing rotates by one rack so low-entropy elephants always
// cross the fabric; incast aims everything at the first host.
std::vector<FlowArrival> poisson_arrivals(const TrafficSpec& spec, const Topology& topo,
                                          SimTime horizon);

// Splits a packet departure trace at inter-packet gaps exceeding the
// threshold; returns flowlet sizes in bytes.
struct TracePacket {
    SimTime time;
    std::uint32_t bytes;
};
std::vector<std::uint64_t> flowlet_census(const std::vector<TracePacket>& trace,
                                          SimTime gap_threshold);

} // namespace lbsim
