#include "lbsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace lbsim {

SimTime phi_from_ecn(std::uint64_t k_min_bytes, std::uint64_t link_rate_bps) {
    if (k_min_bytes == 0 || link_rate_bps == 0)
        throw ConfigError("phi derivation needs a positive ECN threshold and link rate");
    return tx_time(k_min_bytes, link_rate_bps);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& section, const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("bad number for " + section + "." + key + ": '" + v + "'");
    }
}

std::uint64_t to_u64(const std::string& section, const std::string& key,
                     const std::string& v) {
    const double d = to_double(section, key, v);
    if (d < 0 || d != std::floor(d))
        throw ConfigError(section + "." + key + " must be a non-negative integer");
    return static_cast<std::uint64_t>(d);
}

bool to_bool(const std::string& section, const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("bad boolean for " + section + "." + key + ": '" + v + "'");
}

template <typename T, typename F>
std::vector<T> to_list(const std::string& v, F&& conv) {
    std::vector<T> out;
    std::string item;
    std::istringstream ss(v);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(conv(item));
    }
    return out;
}

struct Reader {
    const RawConfig& raw;
    std::set<std::string> consumed;

    std::optional<std::string> take(const std::string& s, const std::string& k) {
        consumed.insert(s + "." + k);
        return raw.get(s, k);
    }
    void num(const std::string& s, const std::string& k, double& slot) {
        if (auto v = take(s, k)) slot = to_double(s, k, *v);
    }
    void u64(const std::string& s, const std::string& k, std::uint64_t& slot) {
        if (auto v = take(s, k)) slot = to_u64(s, k, *v);
    }
    void u32(const std::string& s, const std::string& k, std::uint32_t& slot) {
        if (auto v = take(s, k)) slot = static_cast<std::uint32_t>(to_u64(s, k, *v));
    }
    void i32(const std::string& s, const std::string& k, std::int32_t& slot) {
        if (auto v = take(s, k)) slot = static_cast<std::int32_t>(to_double(s, k, *v));
    }
    void boolean(const std::string& s, const std::string& k, bool& slot) {
        if (auto v = take(s, k)) slot = to_bool(s, k, *v);
    }
    void str(const std::string& s, const std::string& k, std::string& slot) {
        if (auto v = take(s, k)) slot = *v;
    }

    void check_unknown() const {
        for (const auto& [sec, kv] : raw.sections)
            for (const auto& [key, value] : kv) {
                (void)value;
                if (!consumed.count(sec + "." + key))
                    throw ConfigError("unknown config key: " + sec + "." + key);
            }
    }
};

std::uint64_t gbps_to_bps(double gbps) {
    return static_cast<std::uint64_t>(gbps * 1e9);
}

SimTime us_to_ns(double us) { return static_cast<SimTime>(us * 1e3); }

} // namespace

RawConfig parse_ini(const std::string& text) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            raw.sections[section]; // materialize even when empty
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || section.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        raw.set(section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return raw;
}

RawConfig parse_ini_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_ini(ss.str());
}

std::string dump_ini(const RawConfig& raw) {
    std::ostringstream out;
    for (const auto& [section, kv] : raw.sections) {
        out << "[" << section << "]\n";
        for (const auto& [key, value] : kv) out << key << " = " << value << "\n";
        out << "\n";
    }
    return out.str();
}

void apply_override(RawConfig& raw, const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("override must look like section.key=value: " + assignment);
    raw.set(trim(assignment.substr(0, dot)),
            trim(assignment.substr(dot + 1, eq - dot - 1)),
            trim(assignment.substr(eq + 1)));
}

ExperimentConfig config_from_raw(const RawConfig& raw) {
    ExperimentConfig cfg;
    Reader r{raw, {}};

    if (auto v = r.take("topology", "kind")) {
        if (*v == "leaf_spine")
            cfg.topology.kind = TopologyKind::LeafSpine;
        else if (*v == "fat_tree")
            cfg.topology.kind = TopologyKind::FatTree;
        else
            throw ConfigError("topology.kind must be leaf_spine or fat_tree");
    }
    auto& t = cfg.topology;
    r.u32("topology", "leaves", t.leaves);
    r.u32("topology", "spines", t.spines);
    r.u32("topology", "hosts_per_leaf", t.hosts_per_leaf);
    r.u32("topology", "cores", t.cores);
    r.u32("topology", "aggs", t.aggs);
    r.u32("topology", "tors", t.tors);
    r.u32("topology", "hosts_per_tor", t.hosts_per_tor);
    r.u32("topology", "pods", t.pods);
    r.num("topology", "host_link_gbps", t.host_link_gbps);
    r.num("topology", "fabric_link_gbps", t.fabric_link_gbps);
    r.num("topology", "tor_agg_gbps", t.tor_agg_gbps);
    r.num("topology", "agg_core_gbps", t.agg_core_gbps);
    r.num("topology", "link_delay_us", t.link_delay_us);
    r.u64("topology", "queue_capacity_bytes", t.queue_capacity_bytes);
    r.i32("topology", "asymmetry_failed_spine", t.failed_spine);
    r.i32("topology", "asymmetry_boosted_spine", t.boosted_spine);
    r.num("topology", "asymmetry_factor", t.asymmetry_factor);

    if (auto v = r.take("scheme", "kind")) {
        auto k = scheme_from_name(*v);
        if (!k) throw ConfigError("unknown scheme.kind: " + *v);
        cfg.scheme.kind = *k;
    }
    auto& s = cfg.scheme;
    r.u32("scheme", "n", s.n);
    r.num("scheme", "phi_us", s.phi_us);
    r.num("scheme", "dedup_window_us", s.dedup_window_us);
    r.u32("scheme", "retries", s.retries);
    r.num("scheme", "flowlet_gap_us", s.flowlet_gap_us);
    r.u32("scheme", "drill_d", s.drill_d);

    auto& tr = cfg.transport;
    r.u32("transport", "mtu", tr.mtu);
    r.u64("transport", "max_outstanding_bytes", tr.max_outstanding_bytes);
    r.u32("transport", "ack_coalescing", tr.ack_coalescing);
    r.num("transport", "rto_us", tr.rto_us);
    r.num("transport", "dcqcn_g", tr.dcqcn_g);
    r.num("transport", "dcqcn_alpha_timer_us", tr.dcqcn_alpha_timer_us);
    r.num("transport", "dcqcn_rate_timer_us", tr.dcqcn_rate_timer_us);
    r.u32("transport", "dcqcn_fast_recovery_ticks", tr.dcqcn_fast_recovery_ticks);
    r.num("transport", "dcqcn_rate_ai_mbps", tr.dcqcn_rate_ai_mbps);
    r.num("transport", "dcqcn_rate_hai_mbps", tr.dcqcn_rate_hai_mbps);
    r.num("transport", "dcqcn_min_rate_mbps", tr.dcqcn_min_rate_mbps);
    r.num("transport", "cnp_window_us", tr.cnp_window_us);
    r.u64("transport", "ecn_kmin_bytes", tr.ecn_kmin_bytes);
    r.u64("transport", "ecn_kmax_bytes", tr.ecn_kmax_bytes);
    r.num("transport", "ecn_pmax", tr.ecn_pmax);
    r.boolean("transport", "pfc_enabled", tr.pfc_enabled);
    r.u64("transport", "pfc_pause_bytes", tr.pfc_pause_bytes);
    r.u64("transport", "pfc_resume_bytes", tr.pfc_resume_bytes);

    if (auto v = r.take("workload", "kind")) {
        if (*v == "poisson")
            cfg.workload.kind = WorkloadKind::Poisson;
        else if (*v == "streams")
            cfg.workload.kind = WorkloadKind::Streams;
        else if (*v == "ooo_scenario")
            cfg.workload.kind = WorkloadKind::OooScenario;
        else if (*v == "census")
            cfg.workload.kind = WorkloadKind::Census;
        else
            throw ConfigError("unknown workload.kind: " + *v);
    }
    if (auto v = r.take("workload", "pairing")) {
        if (*v == "random")
            cfg.workload.pairing = PairingMode::Random;
        else if (*v == "permutation")
            cfg.workload.pairing = PairingMode::Permutation;
        else if (*v == "incast")
            cfg.workload.pairing = PairingMode::Incast;
        else
            throw ConfigError("unknown workload.pairing: " + *v);
    }
    auto& w = cfg.workload;
    r.num("workload", "load", w.load);
    r.num("workload", "arrival_window_ms", w.arrival_window_ms);
    r.boolean("workload", "independent_flows", w.independent_flows);
    r.str("workload", "cdf_file", w.cdf_file);
    r.u64("workload", "fixed_size_bytes", w.fixed_size_bytes);
    r.num("workload", "app_rate_fraction", w.app_rate_fraction);
    r.u32("workload", "stream_pairs", w.stream_pairs);
    r.u64("workload", "stream_wqe_bytes", w.stream_wqe_bytes);
    r.num("workload", "stream_stagger_us", w.stream_stagger_us);
    r.u64("workload", "stream_count", w.stream_count);
    r.u32("workload", "stream_outstanding", w.stream_outstanding);
    if (auto v = r.take("workload", "ooo_sizes"))
        w.ooo_sizes = to_list<std::uint64_t>(*v, [](const std::string& x) {
            return to_u64("workload", "ooo_sizes", x);
        });
    if (auto v = r.take("workload", "ooo_delays_us"))
        w.ooo_delays_us = to_list<double>(*v, [](const std::string& x) {
            return to_double("workload", "ooo_delays_us", x);
        });
    if (auto v = r.take("workload", "census_thresholds_us"))
        w.census_thresholds_us = to_list<double>(*v, [](const std::string& x) {
            return to_double("workload", "census_thresholds_us", x);
        });
    r.u64("workload", "census_flow_bytes", w.census_flow_bytes);

    auto& run = cfg.run;
    r.num("run", "horizon_ms", run.horizon_ms);
    if (auto v = r.take("run", "seeds"))
        run.seeds = to_list<std::uint64_t>(
            *v, [](const std::string& x) { return to_u64("run", "seeds", x); });
    r.num("run", "imbalance_window_us", run.imbalance_window_us);
    if (auto v = r.take("run", "sweep_n"))
        run.sweep_n = to_list<std::uint32_t>(*v, [](const std::string& x) {
            return static_cast<std::uint32_t>(to_u64("run", "sweep_n", x));
        });
    if (auto v = r.take("run", "sweep_load"))
        run.sweep_load = to_list<double>(
            *v, [](const std::string& x) { return to_double("run", "sweep_load", x); });
    r.u32("run", "max_parallel", run.max_parallel);

    r.check_unknown();

    // Cross-field validation.
    if (s.n < 1) throw ConfigError("scheme.n must be >= 1");
    if (cfg.phi() == 0) throw ConfigError("phi must be positive");
    if (tr.mtu < 256) throw ConfigError("transport.mtu must be >= 256");
    if (tr.ecn_kmin_bytes >= tr.ecn_kmax_bytes)
        throw ConfigError("ecn_kmin_bytes must be < ecn_kmax_bytes");
    if (tr.ecn_pmax <= 0 || tr.ecn_pmax > 1)
        throw ConfigError("ecn_pmax must lie in (0, 1]");
    if (tr.pfc_resume_bytes >= tr.pfc_pause_bytes)
        throw ConfigError("pfc_resume_bytes must be < pfc_pause_bytes");
    if (t.queue_capacity_bytes < 2ull * tr.mtu)
        throw ConfigError("queue capacity must hold at least two MTU packets");
    if (w.kind == WorkloadKind::Poisson && (w.load <= 0 || w.load > 1))
        throw ConfigError("workload.load must lie in (0, 1]");
    if (w.kind == WorkloadKind::Poisson && w.cdf_file.empty() && w.fixed_size_bytes == 0)
        throw ConfigError("poisson workload needs cdf_file or fixed_size_bytes");
    if (run.seeds.empty()) throw ConfigError("run.seeds must not be empty");
    if (run.horizon_ms <= 0) throw ConfigError("run.horizon_ms must be positive");
    for (auto n : run.sweep_n)
        if (n < 1) throw ConfigError("run.sweep_n entries must be >= 1");
    if (w.kind == WorkloadKind::OooScenario &&
        w.ooo_sizes.size() != w.ooo_delays_us.size())
        throw ConfigError("ooo_sizes and ooo_delays_us must have matching lengths");
    return cfg;
}

SimTime ExperimentConfig::phi() const {
    if (scheme.phi_us > 0) return us_to_ns(scheme.phi_us);
    const std::uint64_t fabric_bps =
        topology.kind == TopologyKind::LeafSpine ? gbps_to_bps(topology.fabric_link_gbps)
                                                 : gbps_to_bps(topology.agg_core_gbps);
    return phi_from_ecn(transport.ecn_kmin_bytes, fabric_bps);
}

RawConfig raw_from_config(const ExperimentConfig& cfg) {
    RawConfig raw;
    const auto& t = cfg.topology;
    raw.set("topology", "kind",
            t.kind == TopologyKind::LeafSpine ? "leaf_spine" : "fat_tree");
    auto num = [](double d) {
        std::ostringstream ss;
        ss << d;
        return ss.str();
    };
    raw.set("topology", "leaves", std::to_string(t.leaves));
    raw.set("topology", "spines", std::to_string(t.spines));
    raw.set("topology", "hosts_per_leaf", std::to_string(t.hosts_per_leaf));
    raw.set("topology", "cores", std::to_string(t.cores));
    raw.set("topology", "aggs", std::to_string(t.aggs));
    raw.set("topology", "tors", std::to_string(t.tors));
    raw.set("topology", "hosts_per_tor", std::to_string(t.hosts_per_tor));
    raw.set("topology", "pods", std::to_string(t.pods));
    raw.set("topology", "host_link_gbps", num(t.host_link_gbps));
    raw.set("topology", "fabric_link_gbps", num(t.fabric_link_gbps));
    raw.set("topology", "tor_agg_gbps", num(t.tor_agg_gbps));
    raw.set("topology", "agg_core_gbps", num(t.agg_core_gbps));
    raw.set("topology", "link_delay_us", num(t.link_delay_us));
    raw.set("topology", "queue_capacity_bytes", std::to_string(t.queue_capacity_bytes));
    raw.set("topology", "asymmetry_failed_spine", std::to_string(t.failed_spine));
    raw.set("topology", "asymmetry_boosted_spine", std::to_string(t.boosted_spine));
    raw.set("topology", "asymmetry_factor", num(t.asymmetry_factor));

    const auto& s = cfg.scheme;
    raw.set("scheme", "kind", scheme_name(s.kind));
    raw.set("scheme", "n", std::to_string(s.n));
    raw.set("scheme", "phi_us", num(s.phi_us));
    raw.set("scheme", "dedup_window_us", num(s.dedup_window_us));
    raw.set("scheme", "retries", std::to_string(s.retries));
    raw.set("scheme", "flowlet_gap_us", num(s.flowlet_gap_us));
    raw.set("scheme", "drill_d", std::to_string(s.drill_d));

    const auto& tr = cfg.transport;
    raw.set("transport", "mtu", std::to_string(tr.mtu));
    raw.set("transport", "max_outstanding_bytes", std::to_string(tr.max_outstanding_bytes));
    raw.set("transport", "ack_coalescing", std::to_string(tr.ack_coalescing));
    raw.set("transport", "rto_us", num(tr.rto_us));
    raw.set("transport", "dcqcn_g", num(tr.dcqcn_g));
    raw.set("transport", "dcqcn_alpha_timer_us", num(tr.dcqcn_alpha_timer_us));
    raw.set("transport", "dcqcn_rate_timer_us", num(tr.dcqcn_rate_timer_us));
    raw.set("transport", "dcqcn_fast_recovery_ticks",
            std::to_string(tr.dcqcn_fast_recovery_ticks));
    raw.set("transport", "dcqcn_rate_ai_mbps", num(tr.dcqcn_rate_ai_mbps));
    raw.set("transport", "dcqcn_rate_hai_mbps", num(tr.dcqcn_rate_hai_mbps));
    raw.set("transport", "dcqcn_min_rate_mbps", num(tr.dcqcn_min_rate_mbps));
    raw.set("transport", "cnp_window_us", num(tr.cnp_window_us));
    raw.set("transport", "ecn_kmin_bytes", std::to_string(tr.ecn_kmin_bytes));
    raw.set("transport", "ecn_kmax_bytes", std::to_string(tr.ecn_kmax_bytes));
    raw.set("transport", "ecn_pmax", num(tr.ecn_pmax));
    raw.set("transport", "pfc_enabled", tr.pfc_enabled ? "true" : "false");
    raw.set("transport", "pfc_pause_bytes", std::to_string(tr.pfc_pause_bytes));
    raw.set("transport", "pfc_resume_bytes", std::to_string(tr.pfc_resume_bytes));

    const auto& w = cfg.workload;
    const char* wk = "poisson";
    if (w.kind == WorkloadKind::Streams) wk = "streams";
    if (w.kind == WorkloadKind::OooScenario) wk = "ooo_scenario";
    if (w.kind == WorkloadKind::Census) wk = "census";
    raw.set("workload", "kind", wk);
    raw.set("workload", "pairing",
            w.pairing == PairingMode::Random
                ? "random"
                : (w.pairing == PairingMode::Permutation ? "permutation" : "incast"));
    raw.set("workload", "load", num(w.load));
    raw.set("workload", "arrival_window_ms", num(w.arrival_window_ms));
    raw.set("workload", "independent_flows", w.independent_flows ? "true" : "false");
    if (!w.cdf_file.empty()) raw.set("workload", "cdf_file", w.cdf_file);
    raw.set("workload", "fixed_size_bytes", std::to_string(w.fixed_size_bytes));
    raw.set("workload", "app_rate_fraction", num(w.app_rate_fraction));
    raw.set("workload", "stream_pairs", std::to_string(w.stream_pairs));
    raw.set("workload", "stream_wqe_bytes", std::to_string(w.stream_wqe_bytes));
    raw.set("workload", "stream_stagger_us", num(w.stream_stagger_us));
    raw.set("workload", "stream_count", std::to_string(w.stream_count));
    raw.set("workload", "stream_outstanding", std::to_string(w.stream_outstanding));
    auto join_u64 = [](const std::vector<std::uint64_t>& xs) {
        std::ostringstream ss;
        for (std::size_t i = 0; i < xs.size(); ++i) ss << (i ? "," : "") << xs[i];
        return ss.str();
    };
    auto join_num = [&num](const auto& xs) {
        std::ostringstream ss;
        for (std::size_t i = 0; i < xs.size(); ++i) ss << (i ? "," : "") << num(xs[i]);
        return ss.str();
    };
    raw.set("workload", "ooo_sizes", join_u64(w.ooo_sizes));
    raw.set("workload", "ooo_delays_us", join_num(w.ooo_delays_us));
    raw.set("workload", "census_thresholds_us", join_num(w.census_thresholds_us));
    raw.set("workload", "census_flow_bytes", std::to_string(w.census_flow_bytes));

    const auto& run = cfg.run;
    raw.set("run", "horizon_ms", num(run.horizon_ms));
    raw.set("run", "seeds", join_u64(run.seeds));
    raw.set("run", "imbalance_window_us", num(run.imbalance_window_us));
    if (!run.sweep_n.empty()) {
        std::ostringstream ss;
        for (std::size_t i = 0; i < run.sweep_n.size(); ++i)
            ss << (i ? "," : "") << run.sweep_n[i];
        raw.set("run", "sweep_n", ss.str());
    }
    if (!run.sweep_load.empty()) raw.set("run", "sweep_load", join_num(run.sweep_load));
    raw.set("run", "max_parallel", std::to_string(run.max_parallel));
    return raw;
}

Topology build_topology(const TopologySection& t) {
    const SimTime delay = us_to_ns(t.link_delay_us);
    Topology topo;
    if (t.kind == TopologyKind::LeafSpine) {
        const LinkSpec host_link{gbps_to_bps(t.host_link_gbps), delay,
                                 t.queue_capacity_bytes};
        const LinkSpec fabric_link{gbps_to_bps(t.fabric_link_gbps), delay,
                                   t.queue_capacity_bytes};
        topo = build_leaf_spine(t.leaves, t.spines, t.hosts_per_leaf, host_link,
                                fabric_link);
        if (t.failed_spine >= 0 || t.asymmetry_factor != 1.0) {
            const std::int32_t failed =
                t.failed_spine >= 0 ? static_cast<std::int32_t>(t.leaves) + t.failed_spine
                                    : -1;
            const std::int32_t boosted =
                t.boosted_spine >= 0 ? static_cast<std::int32_t>(t.leaves) + t.boosted_spine
                                     : -1;
            topo = apply_asymmetry(topo, failed, boosted, t.asymmetry_factor);
        }
    } else {
        const LinkSpec host_link{gbps_to_bps(t.host_link_gbps), delay,
                                 t.queue_capacity_bytes};
        const LinkSpec tor_agg{gbps_to_bps(t.tor_agg_gbps), delay, t.queue_capacity_bytes};
        const LinkSpec agg_core{gbps_to_bps(t.agg_core_gbps), delay,
                                t.queue_capacity_bytes};
        topo = build_fat_tree(t.cores, t.aggs, t.tors, t.hosts_per_tor, t.pods, host_link,
                              tor_agg, agg_core);
    }
    return topo;
}

SimConfig make_sim_config(const ExperimentConfig& cfg, std::uint64_t seed,
                          std::uint32_t shaper_n) {
    SimConfig sc;
    sc.scheme = cfg.scheme.kind;
    sc.shaper_n = shaper_n;
    sc.mtu = cfg.transport.mtu;
    sc.max_outstanding_bytes = cfg.transport.max_outstanding_bytes;
    sc.ack_coalescing = std::max<std::uint32_t>(1, cfg.transport.ack_coalescing);
    sc.rto = us_to_ns(cfg.transport.rto_us);

    sc.dcqcn.gain = cfg.transport.dcqcn_g;
    sc.dcqcn.alpha_timer = us_to_ns(cfg.transport.dcqcn_alpha_timer_us);
    sc.dcqcn.rate_timer = us_to_ns(cfg.transport.dcqcn_rate_timer_us);
    sc.dcqcn.fast_recovery_ticks = cfg.transport.dcqcn_fast_recovery_ticks;
    sc.dcqcn.rate_ai_bps =
        static_cast<std::uint64_t>(cfg.transport.dcqcn_rate_ai_mbps * 1e6);
    sc.dcqcn.rate_hai_bps =
        static_cast<std::uint64_t>(cfg.transport.dcqcn_rate_hai_mbps * 1e6);
    sc.dcqcn.min_rate_bps =
        static_cast<std::uint64_t>(cfg.transport.dcqcn_min_rate_mbps * 1e6);
    sc.dcqcn.cnp_window = us_to_ns(cfg.transport.cnp_window_us);

    sc.ecn = EcnConfig{cfg.transport.ecn_kmin_bytes, cfg.transport.ecn_kmax_bytes,
                       cfg.transport.ecn_pmax};
    sc.pfc = PfcConfig{cfg.transport.pfc_enabled, cfg.transport.pfc_pause_bytes,
                       cfg.transport.pfc_resume_bytes};

    sc.phi = cfg.phi();
    sc.dedup_window = cfg.scheme.dedup_window_us < 0
                          ? sc.phi / 4
                          : us_to_ns(cfg.scheme.dedup_window_us);
    sc.seqbalance_retries = cfg.scheme.retries;
    sc.flowlet_gap = us_to_ns(cfg.scheme.flowlet_gap_us);
    sc.drill_d = cfg.scheme.drill_d;

    sc.imbalance_window = us_to_ns(cfg.run.imbalance_window_us);
    sc.horizon = static_cast<SimTime>(cfg.run.horizon_ms * 1e6);
    sc.seed = seed;
    sc.app_rate_fraction = cfg.workload.app_rate_fraction;
    sc.independent_flows = cfg.workload.independent_flows;
    return sc;
}

} // namespace lbsim
