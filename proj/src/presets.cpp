#include "lbsim/presets.hpp"

#include <cstdlib>

#ifndef LBSIM_DATA_DIR
#define LBSIM_DATA_DIR "data"
#endif

namespace lbsim {

std::string data_file(const std::string& name) {
    const char* env = std::getenv("LBSIM_DATA_DIR");
    const std::string root = env ? env : LBSIM_DATA_DIR;
    return root + "/" + name;
}

std::vector<std::string> list_presets() {
    return {"ooo-penalty",     "flowlet-census", "n-sweep",   "symmetric-3srv",
            "asymmetric-3srv", "sim-2tier",      "sim-3tier", "overhead"};
}

bool is_preset(const std::string& name) {
    for (const auto& p : list_presets())
        if (p == name) return true;
    return false;
}

namespace {

// Desk-scale 2-tier fabric shared by the simulation presets: 4 leaves x
// 4 spines x 4 hosts at 10 Gbps, ECN scaled with line rate so the derived
// phi stays at 32us.
void desk_2tier(ExperimentConfig& cfg) {
    cfg.topology.kind = TopologyKind::LeafSpine;
    cfg.topology.leaves = 4;
    cfg.topology.spines = 4;
    cfg.topology.hosts_per_leaf = 4;
    cfg.topology.host_link_gbps = 10;
    cfg.topology.fabric_link_gbps = 10;
    cfg.topology.link_delay_us = 1;
    cfg.transport.ecn_kmin_bytes = 40'000;
    cfg.transport.ecn_kmax_bytes = 130'000;
    cfg.transport.ecn_pmax = 0.2;
}

// Testbed shape: 2 leaves, 4 spines, 3 servers per leaf, 40 Gbps links,
// ECN (160KB, 520KB, 0.2) so phi derives to 32us.
void testbed_3srv(ExperimentConfig& cfg) {
    cfg.topology.kind = TopologyKind::LeafSpine;
    cfg.topology.leaves = 2;
    cfg.topology.spines = 4;
    cfg.topology.hosts_per_leaf = 3;
    cfg.topology.host_link_gbps = 40;
    cfg.topology.fabric_link_gbps = 40;
    cfg.topology.link_delay_us = 1;
    cfg.transport.ecn_kmin_bytes = 160'000;
    cfg.transport.ecn_kmax_bytes = 520'000;
    cfg.transport.ecn_pmax = 0.2;
    cfg.workload.kind = WorkloadKind::Streams;
    cfg.workload.stream_pairs = 3;
    cfg.workload.stream_wqe_bytes = 2 * 1024 * 1024;
    cfg.workload.stream_outstanding = 8; // keep the pipe full across chains
    cfg.workload.load = 1.0; // bandwidth-intensive senders; overhead sweeps lower
    cfg.scheme.kind = SchemeKind::SeqBalance;
    cfg.scheme.n = 4;
}

} // namespace

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig cfg;

    if (name == "ooo-penalty") {
        cfg.topology.kind = TopologyKind::LeafSpine;
        cfg.topology.leaves = 1;
        cfg.topology.spines = 1;
        cfg.topology.hosts_per_leaf = 2;
        cfg.topology.host_link_gbps = 10;
        cfg.topology.fabric_link_gbps = 10;
        cfg.scheme.kind = SchemeKind::Ecmp;
        cfg.workload.kind = WorkloadKind::OooScenario;
        cfg.workload.ooo_sizes = {65536, 1048576};
        cfg.workload.ooo_delays_us = {250, 1700};
        cfg.run.horizon_ms = 20;
        cfg.run.seeds = {1};
        return cfg;
    }
    if (name == "flowlet-census") {
        cfg.topology.kind = TopologyKind::LeafSpine;
        cfg.topology.leaves = 2;
        cfg.topology.spines = 1;
        cfg.topology.hosts_per_leaf = 1;
        cfg.topology.host_link_gbps = 10;
        cfg.topology.fabric_link_gbps = 10;
        cfg.scheme.kind = SchemeKind::Ecmp;
        cfg.workload.kind = WorkloadKind::Census;
        cfg.workload.census_flow_bytes = 1ull << 30;
        cfg.workload.census_thresholds_us = {10, 100};
        cfg.run.horizon_ms = 950;
        cfg.run.seeds = {1};
        return cfg;
    }
    if (name == "n-sweep") {
        desk_2tier(cfg);
        cfg.scheme.kind = SchemeKind::SeqBalance;
        cfg.workload.kind = WorkloadKind::Poisson;
        cfg.workload.pairing = PairingMode::Permutation;
        cfg.workload.fixed_size_bytes = 8 * 1024 * 1024;
        cfg.workload.independent_flows = false; // few long-lived QPs, low entropy
        cfg.workload.load = 0.8;
        cfg.workload.arrival_window_ms = 25;
        cfg.run.sweep_n = {2, 4, 6};
        cfg.run.horizon_ms = 60;
        cfg.run.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        return cfg;
    }
    if (name == "symmetric-3srv") {
        testbed_3srv(cfg);
        cfg.workload.stream_stagger_us = 10000;
        cfg.run.horizon_ms = 30;
        cfg.run.seeds = {1, 2, 3, 4, 5};
        return cfg;
    }
    if (name == "asymmetric-3srv") {
        testbed_3srv(cfg);
        cfg.topology.failed_spine = 3;
        cfg.topology.boosted_spine = 2;
        cfg.topology.asymmetry_factor = 2.0;
        cfg.workload.stream_stagger_us = 10000;
        cfg.run.horizon_ms = 30;
        cfg.run.seeds = {1,  2,  3,  4,  5,  6,  7,  8,  9,  10, 11, 12, 13, 14,
                         15, 16, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27, 28,
                         29, 30, 31, 32, 33, 34, 35, 36, 37, 38, 39, 40};
        return cfg;
    }
    if (name == "sim-2tier") {
        desk_2tier(cfg);
        cfg.scheme.kind = SchemeKind::SeqBalance;
        cfg.scheme.n = 4;
        cfg.workload.kind = WorkloadKind::Poisson;
        cfg.workload.pairing = PairingMode::Permutation;
        cfg.workload.fixed_size_bytes = 8 * 1024 * 1024;
        cfg.workload.independent_flows = false; // few long-lived QPs, low entropy
        cfg.workload.load = 0.7;
        cfg.workload.arrival_window_ms = 25;
        cfg.run.horizon_ms = 60;
        cfg.run.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        return cfg;
    }
    if (name == "sim-3tier") {
        cfg.topology.kind = TopologyKind::FatTree;
        cfg.topology.cores = 4;
        cfg.topology.aggs = 4;
        cfg.topology.tors = 4;
        cfg.topology.hosts_per_tor = 4;
        cfg.topology.pods = 2;
        cfg.topology.host_link_gbps = 10;
        cfg.topology.tor_agg_gbps = 20;
        cfg.topology.agg_core_gbps = 10;
        cfg.transport.ecn_kmin_bytes = 40'000;
        cfg.transport.ecn_kmax_bytes = 130'000;
        cfg.scheme.kind = SchemeKind::SeqBalance;
        cfg.scheme.n = 4;
        cfg.scheme.phi_us = 32;
        cfg.workload.kind = WorkloadKind::Poisson;
        cfg.workload.pairing = PairingMode::Random;
        cfg.workload.cdf_file = data_file("websearch.cdf");
        cfg.workload.load = 0.6;
        cfg.run.horizon_ms = 20;
        cfg.run.seeds = {1, 2};
        return cfg;
    }
    if (name == "overhead") {
        testbed_3srv(cfg);
        cfg.workload.stream_stagger_us = 0; // all senders from t=0
        cfg.run.sweep_load = {0.25, 0.50, 0.75};
        cfg.run.horizon_ms = 12;
        cfg.run.seeds = {1, 2, 3};
        return cfg;
    }
    throw ConfigError("unknown preset: " + name);
}

} // namespace lbsim
