#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lbsim/sim_core.hpp"
#include "lbsim/time_types.hpp"

namespace lbsim {

struct FlowRecord {
    std::uint64_t wqe_id = 0;
    std::uint32_t src_host = 0;
    std::uint32_t dst_host = 0;
    std::uint64_t size_bytes = 0;
    SimTime start = 0;
    SimTime end = 0;
    std::uint64_t retransmitted_bytes = 0;
    double slowdown = 0.0;
};

// slowdown = fct / (size*8/line_rate + base_rtt). base_rtt folds the
// store-and-forward terms; callers pass the per-pair unloaded value.
double fct_slowdown(const FlowRecord& rec, std::uint64_t line_rate_bps, SimTime base_rtt);

struct ImbalanceSample {
    std::uint32_t tor = 0;
    SimTime window_start = 0;
    std::vector<std::uint64_t> per_uplink_bytes;
};

// (max - min) / mean over the window's per-uplink byte counts. Windows where
// nothing moved are skipped by the caller (0/0 is not a sample).
double throughput_imbalance(const ImbalanceSample& sample);

// Nearest-rank percentile over a copy of `values`; p in [0, 100].
double percentile(std::vector<double> values, double p);

// Per-run collector: append-only during the run, aggregated afterwards.
struct RunMetrics {
    std::vector<FlowRecord> flows;
    std::vector<ImbalanceSample> imbalance;

    std::uint64_t data_wire_bytes = 0;
    std::uint64_t congestion_wire_bytes = 0;
    std::uint64_t congestion_packets = 0;
    std::uint64_t cnp_packets = 0;
    std::uint64_t packets_dropped = 0;
    std::uint64_t reorder_retx_packets = 0; // NAK-triggered resends
    std::uint64_t rto_retx_packets = 0;
    std::uint64_t retransmitted_bytes = 0;
    std::uint64_t delivered_unique_bytes = 0;
    std::uint64_t transmitted_data_bytes = 0;
    std::uint64_t ecn_marks = 0;
    std::uint64_t pfc_pauses = 0;
    std::uint64_t seqbalance_fallbacks = 0;
    std::uint64_t subflows_started = 0;
    SimTime horizon = 0;

    double data_bps() const {
        return horizon ? static_cast<double>(data_wire_bytes) * 8e9 /
                             static_cast<double>(horizon)
                       : 0.0;
    }
    double congestion_bps() const {
        return horizon ? static_cast<double>(congestion_wire_bytes) * 8e9 /
                             static_cast<double>(horizon)
                       : 0.0;
    }
};

struct SlowdownSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double p50 = 0.0;
    double p99 = 0.0;
};

SlowdownSummary summarize_slowdowns(const std::vector<FlowRecord>& flows);

} // namespace lbsim
