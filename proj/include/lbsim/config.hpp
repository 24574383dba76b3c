#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lbsim/congestion.hpp"
#include "lbsim/lb_schemes.hpp"
#include "lbsim/sim.hpp"
#include "lbsim/time_types.hpp"
#include "lbsim/topology.hpp"
#include "lbsim/workload.hpp"

namespace lbsim {

// phi = time to drain the ECN Kmin threshold at line rate, rounded up.
SimTime phi_from_ecn(std::uint64_t k_min_bytes, std::uint64_t link_rate_bps);

// Section -> key -> value, as read from the config file. Unknown keys are
// rejected during typing so typos fail fast.
struct RawConfig {
    std::map<std::string, std::map<std::string, std::string>> sections;

    void set(const std::string& section, const std::string& key, const std::string& value) {
        sections[section][key] = value;
    }
    std::optional<std::string> get(const std::string& section, const std::string& key) const {
        auto s = sections.find(section);
        if (s == sections.end()) return std::nullopt;
        auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        return k->second;
    }
};

RawConfig parse_ini(const std::string& text);
RawConfig parse_ini_file(const std::string& path);
std::string dump_ini(const RawConfig& raw);

// "section.key=value"
void apply_override(RawConfig& raw, const std::string& assignment);

enum class TopologyKind : std::uint8_t { LeafSpine, FatTree };
enum class WorkloadKind : std::uint8_t { Poisson, Streams, OooScenario, Census };

struct TopologySection {
    TopologyKind kind = TopologyKind::LeafSpine;
    std::uint32_t leaves = 2, spines = 2, hosts_per_leaf = 2;
    std::uint32_t cores = 1, aggs = 2, tors = 2, hosts_per_tor = 1, pods = 1;
    double host_link_gbps = 10, fabric_link_gbps = 10;
    double tor_agg_gbps = 10, agg_core_gbps = 10;
    double link_delay_us = 1;
    std::uint64_t queue_capacity_bytes = 2'000'000;
    std::int32_t failed_spine = -1;  // index within the spine tier
    std::int32_t boosted_spine = -1; // index within the spine tier
    double asymmetry_factor = 1.0;
};

struct SchemeSection {
    SchemeKind kind = SchemeKind::Ecmp;
    std::uint32_t n = 1;
    double phi_us = 0; // 0 = derive from the ECN threshold and fabric rate
    double dedup_window_us = -1; // <0 = phi/4, 0 = dedup off
    std::uint32_t retries = 8;
    double flowlet_gap_us = 100;
    std::uint32_t drill_d = 2;
};

struct TransportSection {
    std::uint32_t mtu = 1024;
    std::uint64_t max_outstanding_bytes = 1024 * 1024;
    std::uint32_t ack_coalescing = 1;
    double rto_us = 10'000;
    double dcqcn_g = 1.0 / 16.0;
    double dcqcn_alpha_timer_us = 55;
    double dcqcn_rate_timer_us = 55;
    std::uint32_t dcqcn_fast_recovery_ticks = 5;
    double dcqcn_rate_ai_mbps = 40;
    double dcqcn_rate_hai_mbps = 400;
    double dcqcn_min_rate_mbps = 1;
    double cnp_window_us = 50;
    std::uint64_t ecn_kmin_bytes = 40'000;
    std::uint64_t ecn_kmax_bytes = 130'000;
    double ecn_pmax = 0.2;
    bool pfc_enabled = true;
    std::uint64_t pfc_pause_bytes = 512 * 1024;
    std::uint64_t pfc_resume_bytes = 384 * 1024;
};

struct WorkloadSection {
    WorkloadKind kind = WorkloadKind::Poisson;
    PairingMode pairing = PairingMode::Random;
    double load = 0.5;
    double arrival_window_ms = 0; // 0 = arrivals until the horizon
    bool independent_flows = true; // false = FIFO WQE chain per host pair
    std::string cdf_file;
    std::uint64_t fixed_size_bytes = 0;
    double app_rate_fraction = 0;
    // streams mode (long-lived sender pairs, staggered starts)
    std::uint32_t stream_pairs = 3;
    std::uint64_t stream_wqe_bytes = 2 * 1024 * 1024;
    double stream_stagger_us = 0;
    std::uint64_t stream_count = 0;
    std::uint32_t stream_outstanding = 1; // WQE chains in flight per pair
    // single-packet delay scenario
    std::vector<std::uint64_t> ooo_sizes{65536, 1048576};
    std::vector<double> ooo_delays_us{250, 1700};
    // census thresholds
    std::vector<double> census_thresholds_us{10, 100};
    std::uint64_t census_flow_bytes = 1ull << 30;
};

struct RunSection {
    double horizon_ms = 10;
    std::vector<std::uint64_t> seeds{1};
    double imbalance_window_us = 100;
    std::vector<std::uint32_t> sweep_n; // non-empty = run once per N
    std::vector<double> sweep_load;     // non-empty = run once per load
    std::uint32_t max_parallel = 0;     // 0 = hardware concurrency
};

struct ExperimentConfig {
    TopologySection topology;
    SchemeSection scheme;
    TransportSection transport;
    WorkloadSection workload;
    RunSection run;

    SimTime phi() const; // explicit or derived
};

ExperimentConfig config_from_raw(const RawConfig& raw);
RawConfig raw_from_config(const ExperimentConfig& cfg); // effective (all keys)

Topology build_topology(const TopologySection& t);
SimConfig make_sim_config(const ExperimentConfig& cfg, std::uint64_t seed,
                          std::uint32_t shaper_n);

} // namespace lbsim
