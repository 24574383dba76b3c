#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <unordered_map>
#include <vector>

#include "lbsim/congestion.hpp"
#include "lbsim/lb_schemes.hpp"
#include "lbsim/metrics.hpp"
#include "lbsim/packet.hpp"
#include "lbsim/sim_core.hpp"
#include "lbsim/topology.hpp"
#include "lbsim/transport.hpp"
#include "lbsim/workload.hpp"

namespace lbsim {

// Everything a single run needs to know. The experiment layer builds this
// from the parsed config file.
struct SimConfig {
    SchemeKind scheme = SchemeKind::Ecmp;
    std::uint32_t shaper_n = 1;
    std::uint32_t mtu = 1024;
    std::uint64_t max_outstanding_bytes = 1024 * 1024;
    std::uint32_t ack_coalescing = 1; // reply every packet
    SimTime rto = msec(10);

    DcqcnConfig dcqcn;
    EcnConfig ecn;
    PfcConfig pfc;

    SimTime phi = usec(32);
    SimTime dedup_window = usec(8); // phi/4; 0 = one packet per mark
    std::uint32_t seqbalance_retries = 8;
    SimTime flowlet_gap = usec(100);
    std::uint32_t drill_d = 2;

    SimTime imbalance_window = usec(100);
    SimTime horizon = msec(10);
    std::uint64_t seed = 1;

    // Application pacing: per host-pair budget as a fraction of the host
    // link, split across the pair's N queue pairs. 0 = line rate.
    double app_rate_fraction = 0.0;

    // Each arrival opens its own connection (fresh QPs, fresh source ports)
    // instead of queueing FIFO behind the pair's existing chain. Off for
    // low-entropy workloads that deliberately reuse a few QPs.
    bool independent_flows = true;

    // Single-packet delay scenario: hold the given PSN of the first pair's
    // first QP so its successors overtake it on the wire.
    SimTime ooo_hold_delay = 0;
    std::uint32_t ooo_hold_psn = 0;

    bool record_departures = false; // per-packet NIC departure trace (pair 0)
};

// A long-lived sender: submits `size` WQEs back to back from `start` until
// the horizon (count = 0) or `count` messages, keeping up to `outstanding`
// WQE chains in flight at once.
struct ContinuousStream {
    std::uint32_t src_host = 0;
    std::uint32_t dst_host = 0;
    std::uint64_t wqe_size = 0;
    SimTime start = 0;
    std::uint64_t count = 0;         // 0 = until horizon
    std::uint32_t outstanding = 1;
};

struct TimeSeriesPoint {
    SimTime time = 0;
    std::uint64_t delivered_bytes = 0;
};

// One deterministic run: owns all mutable state, single event loop.
class Simulation {
public:
    Simulation(Topology topo, SimConfig cfg);

    void add_arrivals(const std::vector<FlowArrival>& arrivals);
    void add_stream(const ContinuousStream& stream);

    RunMetrics run();

    const RunStats& engine_stats() const { return engine_.stats(); }
    const std::vector<TracePacket>& departure_trace() const { return departure_trace_; }
    const std::vector<TimeSeriesPoint>& delivered_series() const { return delivered_series_; }
    const std::vector<CongestionTraceRecord>& congestion_trace() const {
        return congestion_trace_;
    }

private:
    struct OutQueue {
        std::deque<std::uint32_t> fifo; // packet indices; front serializes
        std::uint64_t occupancy = 0;
        bool busy = false;
        bool paused = false;
        std::uint64_t window_bytes = 0; // dequeued this imbalance window
    };

    struct NodeState {
        std::vector<OutQueue> queues;        // parallel to topology ports
        std::vector<std::uint64_t> ingress_bytes; // PFC attribution
        std::vector<bool> ingress_paused;
        DrillState drill;
        FlowletTable flowlets;
        CongaLiteState conga;
        CongestionTable congestion_table;  // source-ToR role
        CongestionPacketLimiter cp_limiter; // destination-ToR role
        std::unordered_map<std::uint64_t, const Path*> pins;
    };

    struct SubWqeState {
        std::uint32_t pair = 0;
        std::uint32_t index = 0;
        std::uint64_t wqe_id = 0;
        bool first_sent = false;
    };

    struct ActiveWqe {
        WorkQueueElement wqe;
        AckBitmap bitmap;
        std::uint64_t retx_bytes = 0;
    };

    struct PairStream {
        std::uint32_t src = 0;
        std::uint32_t dst = 0;
        std::vector<std::uint32_t> qp_ids;
        std::deque<WorkQueueElement> pending;
        std::map<std::uint64_t, ActiveWqe> active; // in-flight WQE chains
        std::uint32_t max_active = 1;
        bool continuous = false;
        std::uint64_t continuous_size = 0;
        std::uint64_t remaining_submit = 0; // UINT64_MAX = until horizon
        std::uint64_t ideal_rate_bps = 0;
        SimTime base_rtt = 0;
    };

    struct HostState {
        std::vector<std::uint32_t> qp_ids; // sender QPs homed here
        bool wake_scheduled = false;
        SimTime wake_at = 0;
    };

    // --- event dispatch ---
    void dispatch(const Event& ev);
    void on_flow_arrival(std::uint32_t arrival_index);
    void on_metric_sample();

    // --- host / transport ---
    std::uint32_t pair_for(std::uint32_t src, std::uint32_t dst);
    std::uint32_t make_pair_stream(std::uint32_t src, std::uint32_t dst);
    void submit_wqe(std::uint32_t pair_idx, std::uint64_t size, SimTime submit_time);
    void pump_pair(std::uint32_t pair_idx);
    void nic_try_send(std::uint32_t host_node);
    void host_receive(std::uint32_t host_node, std::uint32_t pkt_idx);
    void handle_subwqe_acked(std::uint32_t subwqe_idx);
    void send_control_from_host(std::uint32_t host_node, std::uint32_t pkt_idx);
    void arm_rto(std::uint32_t qp_id);
    void on_rto_check(std::uint32_t qp_id);
    void on_dcqcn_alpha(std::uint32_t qp_id);
    void on_dcqcn_rate(std::uint32_t qp_id);
    void on_cnp(std::uint32_t qp_id);

    // --- switching ---
    void switch_receive(std::uint32_t node, std::uint32_t ingress_port,
                        std::uint32_t pkt_idx);
    void forward_packet(std::uint32_t node, std::uint32_t ingress_port,
                        std::uint32_t pkt_idx);
    std::uint32_t pick_up_next(std::uint32_t node, std::uint32_t pkt_idx);
    std::uint32_t down_next_toward(std::uint32_t node, std::uint32_t target_tor) const;
    void select_path_at_source_tor(std::uint32_t tor, Packet& pkt);
    void enqueue_packet(std::uint32_t node, std::uint32_t port, std::uint32_t pkt_idx,
                        std::uint32_t ingress_port);
    void start_dequeue(std::uint32_t node, std::uint32_t port);
    void on_dequeue_done(std::uint32_t node, std::uint32_t port);
    void send_pfc(std::uint32_t node, std::uint32_t ingress_port, bool pause);
    void emit_congestion_packet(std::uint32_t dst_tor, const Packet& data);

    bool is_host(std::uint32_t n) const {
        return topo_.nodes[n].role == NodeRole::Host;
    }

    EventEngine engine_;
    Topology topo_;
    SimConfig cfg_;
    PacketPool pool_;

    std::vector<NodeState> nodes_;
    std::vector<HostState> hosts_;
    std::vector<QueuePair> qps_;
    std::vector<std::uint32_t> qp_pair_; // qp id -> pair index
    std::vector<SubWqeState> subwqes_;
    std::vector<PairStream> pairs_;
    std::map<std::uint64_t, std::uint32_t> pair_lookup_;

    std::vector<FlowArrival> arrivals_;
    std::vector<ContinuousStream> streams_;
    std::vector<std::uint32_t> host_tor_dense_; // node id -> ToR node id
    std::vector<std::uint64_t> scratch_occ_;    // DRILL sampling, no per-packet alloc

    SeededRng marking_rng_;
    SeededRng drill_rng_;
    SeededRng letflow_rng_;
    std::uint64_t ecmp_salt_ = 0;

    RunMetrics metrics_;
    std::vector<TracePacket> departure_trace_;
    std::vector<TimeSeriesPoint> delivered_series_;
    std::vector<CongestionTraceRecord> congestion_trace_;
    std::uint64_t next_wqe_id_ = 1;
    bool ran_ = false;
};

} // namespace lbsim
