#include "lbsim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "lbsim/workload.hpp"

namespace lbsim {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void build_workload(const ExperimentConfig& cfg, double load, Simulation& sim,
                    const Topology& topo, std::uint64_t seed, std::uint64_t ooo_size) {
    const auto& w = cfg.workload;
    const SimTime horizon = static_cast<SimTime>(cfg.run.horizon_ms * 1e6);
    switch (w.kind) {
        case WorkloadKind::Poisson: {
            TrafficSpec spec;
            spec.load_fraction = load;
            spec.fixed_size_bytes = w.fixed_size_bytes;
            if (w.fixed_size_bytes == 0) spec.cdf = FlowSizeCdf::from_file(w.cdf_file);
            spec.pairing = w.pairing;
            spec.seed = seed;
            // Injection may stop before the horizon so queued work drains and
            // slow flows still complete and count.
            SimTime window = horizon;
            if (w.arrival_window_ms > 0)
                window = std::min(
                    horizon, static_cast<SimTime>(w.arrival_window_ms * 1e6));
            sim.add_arrivals(poisson_arrivals(spec, topo, window));
            break;
        }
        case WorkloadKind::Streams: {
            const auto hpl = topo.hosts.size() / topo.tors.size();
            if (w.stream_pairs > hpl)
                throw ConfigError("stream_pairs exceeds hosts per leaf");
            for (std::uint32_t i = 0; i < w.stream_pairs; ++i) {
                ContinuousStream st;
                st.src_host = topo.hosts[i];
                st.dst_host = topo.hosts[hpl + i];
                st.wqe_size = w.stream_wqe_bytes;
                st.start = static_cast<SimTime>(w.stream_stagger_us * 1e3) * i;
                st.count = w.stream_count;
                st.outstanding = w.stream_outstanding;
                sim.add_stream(st);
            }
            break;
        }
        case WorkloadKind::OooScenario: {
            ContinuousStream st;
            st.src_host = topo.hosts[0];
            st.dst_host = topo.hosts[1];
            st.wqe_size = ooo_size;
            st.start = 0;
            st.count = 1;
            sim.add_stream(st);
            break;
        }
        case WorkloadKind::Census: {
            ContinuousStream st;
            st.src_host = topo.hosts[0];
            st.dst_host = topo.hosts[1];
            st.wqe_size = w.census_flow_bytes;
            st.start = 0;
            st.count = 1;
            sim.add_stream(st);
            break;
        }
    }
}

struct Job {
    std::uint32_t variant = 0;
    std::uint32_t slot = 0;
    std::uint32_t shaper_n = 1;
    double load = 0;
    std::uint64_t seed = 0;
};

void finalize_variant(VariantResult& v) {
    std::vector<FlowRecord> all_flows;
    double data_bps_sum = 0, cong_bps_sum = 0;
    for (const auto& run : v.runs) {
        all_flows.insert(all_flows.end(), run.metrics.flows.begin(),
                         run.metrics.flows.end());
        for (const auto& s : run.metrics.imbalance)
            v.imbalance_values.push_back(throughput_imbalance(s));
        v.drops += run.metrics.packets_dropped;
        v.reorder_retx += run.metrics.reorder_retx_packets;
        v.rto_retx += run.metrics.rto_retx_packets;
        v.delivered_bytes += run.metrics.delivered_unique_bytes;
        v.congestion_packets += run.metrics.congestion_packets;
        data_bps_sum += run.metrics.data_bps();
        cong_bps_sum += run.metrics.congestion_bps();
    }
    v.slowdown = summarize_slowdowns(all_flows);
    if (!v.imbalance_values.empty()) {
        double sum = 0;
        for (auto x : v.imbalance_values) sum += x;
        v.mean_imbalance = sum / static_cast<double>(v.imbalance_values.size());
        v.p99_imbalance = percentile(v.imbalance_values, 99);
    }
    if (!v.runs.empty()) {
        data_bps_sum /= static_cast<double>(v.runs.size());
        cong_bps_sum /= static_cast<double>(v.runs.size());
    }
    v.data_bps = data_bps_sum;
    v.congestion_bps = cong_bps_sum;
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& res,
                   const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    std::ofstream eff(out_dir + "/effective_config.txt");
    eff << dump_ini(raw_from_config(cfg));

    std::ofstream meta(out_dir + "/run_meta.txt");
    meta << "slowdown = fct / (size*8/line_rate + base_rtt); base_rtt is the\n"
            "unloaded propagation round trip of the flow's shortest path.\n"
            "percentiles are nearest-rank. imbalance = (max-min)/mean of\n"
            "per-uplink bytes per 100us window (all-zero windows skipped).\n"
            "scheme comparisons report ratios of pooled mean slowdowns over\n"
            "paired seeds. times ns, sizes bytes.\n";

    std::ofstream flows(out_dir + "/flows.csv");
    flows << "variant,seed,wqe_id,src_host,dst_host,size_bytes,start_ns,end_ns,fct_ns,"
             "slowdown,retransmitted_bytes\n";
    std::ofstream imb(out_dir + "/imbalance.csv");
    imb << "variant,seed,tor,window_start_ns,imbalance\n";
    std::ofstream series(out_dir + "/delivered_timeseries.csv");
    series << "variant,seed,time_ns,delivered_bytes\n";
    std::ofstream stats(out_dir + "/runstats.csv");
    stats << "variant,seed,scheduled,arrivals,dequeues,timers,flow_arrivals,"
             "metric_samples,still_queued,drops,reorder_retx,rto_retx,"
             "delivered_bytes,transmitted_bytes,retransmitted_bytes,"
             "congestion_packets,ecn_marks,pfc_pauses\n";
    std::ofstream ctrace(out_dir + "/congestion_trace.bin", std::ios::binary);

    for (const auto& v : res.variants) {
        for (const auto& run : v.runs) {
            for (const auto& f : run.metrics.flows)
                flows << v.label << ',' << run.seed << ',' << f.wqe_id << ','
                      << f.src_host << ',' << f.dst_host << ',' << f.size_bytes << ','
                      << f.start << ',' << f.end << ',' << (f.end - f.start) << ','
                      << fmt_double(f.slowdown) << ',' << f.retransmitted_bytes << '\n';
            for (const auto& s : run.metrics.imbalance)
                imb << v.label << ',' << run.seed << ',' << s.tor << ',' << s.window_start
                    << ',' << fmt_double(throughput_imbalance(s)) << '\n';
            for (const auto& p : run.delivered)
                series << v.label << ',' << run.seed << ',' << p.time << ','
                       << p.delivered_bytes << '\n';
            const auto& m = run.metrics;
            const auto& st = run.stats;
            stats << v.label << ',' << run.seed << ',' << st.scheduled << ','
                  << st.processed[0] << ',' << st.processed[1] << ',' << st.processed[2]
                  << ',' << st.processed[3] << ',' << st.processed[4] << ','
                  << st.still_queued << ',' << m.packets_dropped << ','
                  << m.reorder_retx_packets << ',' << m.rto_retx_packets << ','
                  << m.delivered_unique_bytes << ',' << m.transmitted_data_bytes << ','
                  << m.retransmitted_bytes << ',' << m.congestion_packets << ','
                  << m.ecn_marks << ',' << m.pfc_pauses << '\n';
            for (const auto& rec : run.ctrace) {
                std::uint8_t buf[7];
                encode_congestion_record(rec, buf);
                ctrace.write(reinterpret_cast<const char*>(buf), sizeof(buf));
            }
        }
    }

    std::ofstream summary(out_dir + "/summary.csv");
    summary << "variant,scheme,n,load,seeds,flows,mean_slowdown,p50_slowdown,"
               "p99_slowdown,mean_imbalance,p99_imbalance,data_gbps,congestion_kbps,"
               "overhead_ratio,drops,reorder_retx,rto_retx,delivered_bytes,"
               "congestion_packets\n";
    for (const auto& v : res.variants) {
        const double overhead = v.data_bps > 0 ? v.congestion_bps / v.data_bps : 0.0;
        summary << v.label << ',' << scheme_name(cfg.scheme.kind) << ',' << v.shaper_n
                << ',' << fmt_double(v.load) << ',' << v.runs.size() << ','
                << v.slowdown.count << ',' << fmt_double(v.slowdown.mean) << ','
                << fmt_double(v.slowdown.p50) << ',' << fmt_double(v.slowdown.p99) << ','
                << fmt_double(v.mean_imbalance) << ',' << fmt_double(v.p99_imbalance)
                << ',' << fmt_double(v.data_bps / 1e9) << ','
                << fmt_double(v.congestion_bps / 1e3) << ',' << fmt_double(overhead)
                << ',' << v.drops << ',' << v.reorder_retx << ',' << v.rto_retx << ','
                << v.delivered_bytes << ',' << v.congestion_packets << '\n';
    }

    if (!res.ooo_rows.empty()) {
        std::ofstream ooo(out_dir + "/ooo_table.csv");
        ooo << "size_bytes,fct_base_ns,fct_delayed_ns,ratio\n";
        for (const auto& row : res.ooo_rows)
            ooo << row.size_bytes << ',' << row.fct_base << ',' << row.fct_delayed << ','
                << fmt_double(row.ratio) << '\n';
    }
    if (!res.census_rows.empty()) {
        std::ofstream census(out_dir + "/census.csv");
        census << "threshold_us,flowlets,min_bytes,max_bytes,total_bytes\n";
        for (const auto& row : res.census_rows) {
            std::uint64_t mn = UINT64_MAX, mx = 0, total = 0;
            for (auto b : row.flowlet_bytes) {
                mn = std::min(mn, b);
                mx = std::max(mx, b);
                total += b;
            }
            if (row.flowlet_bytes.empty()) mn = 0;
            census << fmt_double(row.threshold_us) << ',' << row.flowlet_bytes.size()
                   << ',' << mn << ',' << mx << ',' << total << '\n';
        }
    }
}

} // namespace

RunOutput execute_single_run(const ExperimentConfig& cfg, std::uint32_t shaper_n,
                             double load, std::uint64_t seed, SimTime ooo_delay,
                             std::uint64_t ooo_size) {
    Topology topo = build_topology(cfg.topology);
    SimConfig sc = make_sim_config(cfg, seed, shaper_n);
    if (cfg.workload.kind == WorkloadKind::Streams) sc.app_rate_fraction = load;
    if (cfg.workload.kind == WorkloadKind::Census) sc.record_departures = true;
    if (cfg.workload.kind == WorkloadKind::OooScenario && ooo_delay > 0) {
        sc.ooo_hold_delay = ooo_delay;
        // Mid-message packet: segments are MTU-sized, PSNs start at 0.
        sc.ooo_hold_psn = static_cast<std::uint32_t>(
            (ooo_size + cfg.transport.mtu - 1) / cfg.transport.mtu / 2);
    }

    Simulation sim(topo, sc);
    build_workload(cfg, load, sim, topo, seed, ooo_size);
    RunOutput out;
    out.seed = seed;
    out.metrics = sim.run();
    out.stats = sim.engine_stats();
    out.delivered = sim.delivered_series();
    out.departures = sim.departure_trace();
    out.ctrace = sim.congestion_trace();
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    ExperimentResult res;

    if (cfg.workload.kind == WorkloadKind::OooScenario) {
        VariantResult v;
        v.label = "ooo";
        v.shaper_n = cfg.scheme.n;
        for (std::size_t i = 0; i < cfg.workload.ooo_sizes.size(); ++i) {
            const auto size = cfg.workload.ooo_sizes[i];
            const auto delay =
                static_cast<SimTime>(cfg.workload.ooo_delays_us[i] * 1e3);
            auto base = execute_single_run(cfg, cfg.scheme.n, cfg.workload.load,
                                           cfg.run.seeds[0], 0, size);
            auto delayed = execute_single_run(cfg, cfg.scheme.n, cfg.workload.load,
                                              cfg.run.seeds[0], delay, size);
            if (base.metrics.flows.size() != 1 || delayed.metrics.flows.size() != 1)
                throw SimAbort("delay scenario expects exactly one completed flow");
            OooRow row;
            row.size_bytes = size;
            row.fct_base = base.metrics.flows[0].end - base.metrics.flows[0].start;
            row.fct_delayed =
                delayed.metrics.flows[0].end - delayed.metrics.flows[0].start;
            row.ratio = static_cast<double>(row.fct_delayed) /
                        static_cast<double>(row.fct_base);
            res.ooo_rows.push_back(row);
            v.runs.push_back(std::move(base));
            v.runs.push_back(std::move(delayed));
        }
        finalize_variant(v);
        res.variants.push_back(std::move(v));
        if (!out_dir.empty()) write_outputs(cfg, res, out_dir);
        return res;
    }

    if (cfg.workload.kind == WorkloadKind::Census) {
        VariantResult v;
        v.label = "census";
        v.shaper_n = cfg.scheme.n;
        auto run = execute_single_run(cfg, cfg.scheme.n, cfg.workload.load,
                                      cfg.run.seeds[0]);
        for (const auto th_us : cfg.workload.census_thresholds_us) {
            CensusRow row;
            row.threshold_us = th_us;
            row.flowlet_bytes =
                flowlet_census(run.departures, static_cast<SimTime>(th_us * 1e3));
            res.census_rows.push_back(std::move(row));
        }
        v.runs.push_back(std::move(run));
        finalize_variant(v);
        res.variants.push_back(std::move(v));
        if (!out_dir.empty()) write_outputs(cfg, res, out_dir);
        return res;
    }

    std::vector<std::uint32_t> ns = cfg.run.sweep_n;
    if (ns.empty()) ns.push_back(cfg.scheme.n);
    std::vector<double> loads = cfg.run.sweep_load;
    if (loads.empty()) loads.push_back(cfg.workload.load);

    std::vector<Job> jobs;
    for (std::uint32_t vi = 0; const auto n : ns) {
        for (const auto load : loads) {
            VariantResult v;
            std::ostringstream label;
            label << scheme_name(cfg.scheme.kind) << "_n" << n << "_load"
                  << fmt_double(load);
            v.label = label.str();
            v.shaper_n = n;
            v.load = load;
            v.runs.resize(cfg.run.seeds.size());
            res.variants.push_back(std::move(v));
            for (std::uint32_t si = 0; si < cfg.run.seeds.size(); ++si)
                jobs.push_back(Job{vi, si, n, load, cfg.run.seeds[si]});
            ++vi;
        }
    }

    unsigned workers = cfg.run.max_parallel;
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, jobs.size());

    if (workers <= 1) {
        for (const auto& job : jobs)
            res.variants[job.variant].runs[job.slot] =
                execute_single_run(cfg, job.shaper_n, job.load, job.seed);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const auto i = next.fetch_add(1);
                    if (i >= jobs.size()) return;
                    const auto& job = jobs[i];
                    res.variants[job.variant].runs[job.slot] =
                        execute_single_run(cfg, job.shaper_n, job.load, job.seed);
                }
            });
        for (auto& th : pool) th.join();
    }

    for (auto& v : res.variants) finalize_variant(v);
    if (!out_dir.empty()) write_outputs(cfg, res, out_dir);
    return res;
}

} // namespace lbsim
