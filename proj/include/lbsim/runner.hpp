#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lbsim/config.hpp"
#include "lbsim/metrics.hpp"
#include "lbsim/sim.hpp"

namespace lbsim {

struct RunOutput {
    std::uint64_t seed = 0;
    RunMetrics metrics;
    RunStats stats;
    std::vector<TimeSeriesPoint> delivered;
    std::vector<TracePacket> departures;
    std::vector<CongestionTraceRecord> ctrace;
};

// One executed configuration (fixed scheme, N, load) over all seeds.
struct VariantResult {
    std::string label;
    std::uint32_t shaper_n = 1;
    double load = 0;
    std::vector<RunOutput> runs;

    SlowdownSummary slowdown;            // pooled over seeds
    std::vector<double> imbalance_values; // pooled per-window samples
    double mean_imbalance = 0;
    double p99_imbalance = 0;
    std::uint64_t drops = 0;
    std::uint64_t reorder_retx = 0;
    std::uint64_t rto_retx = 0;
    std::uint64_t delivered_bytes = 0;
    std::uint64_t congestion_packets = 0;
    double data_bps = 0;        // mean over runs
    double congestion_bps = 0;  // mean over runs
};

struct OooRow {
    std::uint64_t size_bytes = 0;
    SimTime fct_base = 0;
    SimTime fct_delayed = 0;
    double ratio = 0;
};

struct CensusRow {
    double threshold_us = 0;
    std::vector<std::uint64_t> flowlet_bytes;
};

struct ExperimentResult {
    std::vector<VariantResult> variants;
    std::vector<OooRow> ooo_rows;
    std::vector<CensusRow> census_rows;
};

// Executes every variant/seed of the experiment; when out_dir is non-empty
// writes the CSV outputs, the effective config dump, and the congestion
// packet trace there.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

// Single run, exposed for tests and the acceptance suite.
RunOutput execute_single_run(const ExperimentConfig& cfg, std::uint32_t shaper_n,
                             double load, std::uint64_t seed, SimTime ooo_delay = 0,
                             std::uint64_t ooo_size = 0);

} // namespace lbsim
