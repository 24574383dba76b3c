#include "lbsim/sim.hpp"

#include <algorithm>
#include <cassert>

namespace lbsim {

namespace {
constexpr std::uint32_t kNoIngress = 0xFFFFFFFF;
constexpr std::uint16_t kBaseSport = 0xC000;
} // namespace

Simulation::Simulation(Topology topo, SimConfig cfg)
    : topo_(std::move(topo)),
      cfg_(cfg),
      marking_rng_(cfg.seed, rng_stream::kMarking),
      drill_rng_(cfg.seed, rng_stream::kDrill),
      letflow_rng_(cfg.seed, rng_stream::kLetflow) {
    ecmp_salt_ = SeededRng(cfg_.seed, rng_stream::kEcmpSalt).next_u64();
    nodes_.resize(topo_.nodes.size());
    hosts_.resize(topo_.nodes.size());
    host_tor_dense_.assign(topo_.nodes.size(), 0);
    for (std::size_t i = 0; i < topo_.hosts.size(); ++i)
        host_tor_dense_[topo_.hosts[i]] = topo_.host_tor[i];
    for (std::size_t n = 0; n < topo_.nodes.size(); ++n) {
        nodes_[n].queues.resize(topo_.nodes[n].ports.size());
        nodes_[n].ingress_bytes.assign(topo_.nodes[n].ports.size(), 0);
        nodes_[n].ingress_paused.assign(topo_.nodes[n].ports.size(), false);
        nodes_[n].flowlets.gap = cfg_.flowlet_gap;
        nodes_[n].conga.half_life = cfg_.flowlet_gap;
        nodes_[n].cp_limiter.window = cfg_.dedup_window;
    }
}

void Simulation::add_arrivals(const std::vector<FlowArrival>& arrivals) {
    arrivals_.insert(arrivals_.end(), arrivals.begin(), arrivals.end());
}

void Simulation::add_stream(const ContinuousStream& stream) {
    streams_.push_back(stream);
}

RunMetrics Simulation::run() {
    if (ran_) throw SimAbort("a Simulation object runs once");
    ran_ = true;

    for (std::uint32_t i = 0; i < arrivals_.size(); ++i)
        engine_.schedule(arrivals_[i].time, EventKind::FlowArrival, i);
    for (const auto& st : streams_) {
        const auto stream = st;
        engine_.schedule_callback(st.start, [this, stream] {
            const auto pi = pair_for(stream.src_host, stream.dst_host);
            auto& pair = pairs_[pi];
            pair.continuous = true;
            pair.continuous_size = stream.wqe_size;
            pair.remaining_submit = stream.count == 0 ? UINT64_MAX : stream.count;
            pair.max_active = std::max<std::uint32_t>(1, stream.outstanding);
            pump_pair(pi);
        });
    }
    if (cfg_.imbalance_window > 0 && cfg_.imbalance_window < cfg_.horizon)
        engine_.schedule(cfg_.imbalance_window, EventKind::MetricSample);

    engine_.run_until(cfg_.horizon, [this](const Event& ev) { dispatch(ev); });

    // Flush the final partial imbalance window so sampling conserves bytes.
    on_metric_sample();
    metrics_.horizon = cfg_.horizon;
    return metrics_;
}

void Simulation::dispatch(const Event& ev) {
    switch (ev.kind) {
        case EventKind::PacketArrival:
            if (is_host(ev.a))
                host_receive(ev.a, ev.c);
            else
                switch_receive(ev.a, ev.b, ev.c);
            break;
        case EventKind::PacketDequeue:
            on_dequeue_done(ev.a, ev.b);
            break;
        case EventKind::FlowArrival:
            on_flow_arrival(ev.a);
            break;
        case EventKind::MetricSample:
            on_metric_sample();
            if (engine_.now() + cfg_.imbalance_window <= cfg_.horizon)
                engine_.schedule(engine_.now() + cfg_.imbalance_window,
                                 EventKind::MetricSample);
            break;
        case EventKind::TimerExpiry:
            switch (ev.timer) {
                case TimerKind::NicWake:
                    hosts_[ev.a].wake_scheduled = false;
                    nic_try_send(ev.a);
                    break;
                case TimerKind::DcqcnAlpha:
                    on_dcqcn_alpha(ev.c);
                    break;
                case TimerKind::DcqcnRateIncrease:
                    on_dcqcn_rate(ev.c);
                    break;
                case TimerKind::RetransmitCheck:
                    on_rto_check(ev.c);
                    break;
                case TimerKind::Callback:
                    break; // dispatched inside the engine
            }
            break;
    }
}

// ---------------------------------------------------------------- workload

void Simulation::on_flow_arrival(std::uint32_t arrival_index) {
    const auto& fa = arrivals_[arrival_index];
    const auto pi = cfg_.independent_flows ? make_pair_stream(fa.src_host, fa.dst_host)
                                           : pair_for(fa.src_host, fa.dst_host);
    submit_wqe(pi, fa.size_bytes, engine_.now());
}

std::uint32_t Simulation::pair_for(std::uint32_t src, std::uint32_t dst) {
    const std::uint64_t key = (static_cast<std::uint64_t>(src) << 32) | dst;
    auto it = pair_lookup_.find(key);
    if (it != pair_lookup_.end()) return it->second;
    const auto pi = make_pair_stream(src, dst);
    pair_lookup_.emplace(key, pi);
    return pi;
}

std::uint32_t Simulation::make_pair_stream(std::uint32_t src, std::uint32_t dst) {
    const auto pi = static_cast<std::uint32_t>(pairs_.size());
    PairStream ps;
    ps.src = src;
    ps.dst = dst;

    const std::uint64_t src_link = topo_.nodes[src].ports[0].link.capacity_bps;
    const std::uint64_t dst_link = topo_.nodes[dst].ports[0].link.capacity_bps;
    ps.ideal_rate_bps = std::min(src_link, dst_link);

    // Unloaded round trip: propagation only, a strict lower bound on any
    // observable completion overhead.
    SimTime one_way = topo_.nodes[src].ports[0].link.propagation_delay +
                      topo_.nodes[dst].ports[0].link.propagation_delay;
    const auto src_tor = host_tor_dense_[src];
    const auto dst_tor = host_tor_dense_[dst];
    if (src_tor != dst_tor) {
        const auto& paths = topo_.paths_between(src_tor, dst_tor);
        const auto& nodes = paths.front().nodes;
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
            const int p = topo_.port_between(nodes[i], nodes[i + 1]);
            one_way += topo_.nodes[nodes[i]].ports[p].link.propagation_delay;
        }
    }
    ps.base_rtt = 2 * one_way;

    const std::uint32_t n = cfg_.shaper_n;
    for (std::uint32_t i = 0; i < n; ++i) {
        QueuePair qp;
        qp.id = static_cast<std::uint32_t>(qps_.size());
        qp.ft = FiveTuple{src, dst,
                          static_cast<std::uint16_t>(kBaseSport +
                                                     ((pi * n + i) & 0x3FFF)),
                          kRdmaDstPort, 17};
        qp.max_outstanding_bytes = cfg_.max_outstanding_bytes;
        qp.dcqcn.init(src_link);
        if (cfg_.app_rate_fraction > 0.0)
            qp.app_rate_cap_bps = static_cast<std::uint64_t>(
                cfg_.app_rate_fraction * static_cast<double>(src_link) /
                static_cast<double>(n));
        if (cfg_.ooo_hold_delay > 0 && pi == 0 && i == 0) {
            qp.hold_armed = true;
            qp.hold_psn = cfg_.ooo_hold_psn;
        }
        ps.qp_ids.push_back(qp.id);
        qps_.push_back(qp);
        qp_pair_.push_back(pi);
        hosts_[src].qp_ids.push_back(qps_.back().id);
    }
    pairs_.push_back(std::move(ps));
    return pi;
}

void Simulation::submit_wqe(std::uint32_t pair_idx, std::uint64_t size, SimTime submit_time) {
    auto& pair = pairs_[pair_idx];
    WorkQueueElement wqe;
    wqe.wqe_id = next_wqe_id_++;
    wqe.size = size;
    wqe.src_host = pair.src;
    wqe.dst_host = pair.dst;
    wqe.submit_time = submit_time;
    pair.pending.push_back(wqe);
    pump_pair(pair_idx);
}

void Simulation::pump_pair(std::uint32_t pair_idx) {
    auto& pair = pairs_[pair_idx];
    bool posted = false;
    while (pair.active.size() < pair.max_active) {
        if (pair.pending.empty()) {
            if (!pair.continuous || pair.remaining_submit == 0) break;
            if (pair.remaining_submit != UINT64_MAX) --pair.remaining_submit;
            WorkQueueElement wqe;
            wqe.wqe_id = next_wqe_id_++;
            wqe.size = pair.continuous_size;
            wqe.src_host = pair.src;
            wqe.dst_host = pair.dst;
            wqe.submit_time = engine_.now();
            pair.pending.push_back(wqe);
        }
        const auto wqe = pair.pending.front();
        pair.pending.pop_front();

        auto subs = shaper_split(wqe, cfg_.shaper_n, cfg_.mtu);
        ActiveWqe aw;
        aw.wqe = wqe;
        aw.bitmap = AckBitmap{wqe.wqe_id, std::vector<bool>(subs.size(), false), 0, false};
        pair.active.emplace(wqe.wqe_id, std::move(aw));
        for (auto& sw : subs) {
            const auto sw_idx = static_cast<std::uint32_t>(subwqes_.size());
            subwqes_.push_back(SubWqeState{pair_idx, sw.index, wqe.wqe_id, false});
            auto& qp = qps_[pair.qp_ids[sw.index]];
            const bool was_idle = qp.snd_una == qp.next_psn;
            qp_post_subwqe(qp, sw_idx, sw.size, cfg_.mtu);
            if (was_idle) arm_rto(qp.id);
        }
        posted = true;
    }
    if (posted) nic_try_send(pair.src);
}

// ---------------------------------------------------------------- host NIC

void Simulation::nic_try_send(std::uint32_t host_node) {
    auto& port = nodes_[host_node].queues[0];
    if (!port.fifo.empty() || port.paused) return; // wire busy; waked on drain

    const SimTime now = engine_.now();
    auto& hs = hosts_[host_node];
    std::uint32_t best_qp = 0;
    bool found = false;
    SimTime best_time = 0;

    for (const auto qp_id : hs.qp_ids) {
        auto& qp = qps_[qp_id];
        if (!qp.has_unsent()) continue;
        const auto& seg = qp.segment_at(qp.snd_nxt);
        if (!qp.window_open(seg.bytes)) continue;

        if (qp.hold_armed && !qp.hold_started && qp.snd_nxt == qp.hold_psn) {
            // The held packet "leaves" the transport here but will only hit
            // the wire once a NAK rewinds the pointer and the hold expires.
            qp.hold_started = true;
            qp.hold_release = now + cfg_.ooo_hold_delay;
            qp.outstanding_bytes += seg.bytes;
            qp.snd_nxt = psn_add(qp.snd_nxt, 1);
            if (qp.sent_frontier == qp.hold_psn) qp.sent_frontier = qp.snd_nxt;
            metrics_.transmitted_data_bytes += seg.bytes;
            return nic_try_send(host_node); // re-evaluate
        }
        SimTime ready = std::max(qp.next_send_time, now);
        if (qp.hold_armed && qp.hold_started && !qp.hold_done &&
            qp.snd_nxt == qp.hold_psn) {
            if (now < qp.hold_release) ready = std::max(ready, qp.hold_release);
        }
        if (!found || ready < best_time || (ready == best_time && qp_id < best_qp)) {
            best_qp = qp_id;
            best_time = ready;
            found = true;
        }
    }
    if (!found) return;

    if (best_time > now) {
        if (!hs.wake_scheduled || hs.wake_at > best_time) {
            engine_.schedule(best_time, EventKind::TimerExpiry, host_node, 0, 0,
                             TimerKind::NicWake);
            hs.wake_scheduled = true;
            hs.wake_at = best_time;
        }
        return;
    }

    auto& qp = qps_[best_qp];
    if (qp.hold_armed && qp.snd_nxt == qp.hold_psn && qp.hold_started && !qp.hold_done)
        qp.hold_done = true; // hold expired; this send is the real wire copy

    const auto seg = qp.segment_at(qp.snd_nxt);
    auto& sub = subwqes_[seg.subwqe];
    const bool retransmission = psn_less(qp.snd_nxt, qp.sent_frontier);

    const auto pkt_idx = pool_.alloc();
    auto& pkt = pool_[pkt_idx];
    pkt.kind = PacketKind::Data;
    pkt.ft = qp.ft;
    pkt.psn = qp.snd_nxt;
    pkt.size = seg.bytes;
    pkt.qp = qp.id;
    pkt.ack_req = seg.last_of_subwqe;
    if (seg.first_of_subwqe && !sub.first_sent) {
        pkt.subflow_first = true;
        sub.first_sent = true;
        ++metrics_.subflows_started;
    }
    pkt.route_push(host_node);
    pkt.route_push(topo_.nodes[host_node].ports[0].peer_node);
    pkt.route_pos = 1;

    qp.snd_nxt = psn_add(qp.snd_nxt, 1);
    if (!retransmission) qp.sent_frontier = qp.snd_nxt;
    qp.outstanding_bytes += seg.bytes;

    const std::uint64_t pace = qp.paced_rate();
    qp.next_send_time = std::max(qp.next_send_time, now) + tx_time(seg.bytes, pace);

    metrics_.transmitted_data_bytes += seg.bytes;
    metrics_.data_wire_bytes += seg.bytes;
    if (retransmission) {
        metrics_.retransmitted_bytes += seg.bytes;
        auto& pair = pairs_[qp_pair_[qp.id]];
        auto active = pair.active.find(sub.wqe_id);
        if (active != pair.active.end()) active->second.retx_bytes += seg.bytes;
        if (qp.last_rewind_rto)
            ++metrics_.rto_retx_packets;
        else
            ++metrics_.reorder_retx_packets;
    }
    if (cfg_.record_departures && qp_pair_[qp.id] == 0)
        departure_trace_.push_back(TracePacket{now, seg.bytes});

    enqueue_packet(host_node, 0, pkt_idx, kNoIngress);
    nic_try_send(host_node); // a second QP may be ready at the same instant
}

void Simulation::send_control_from_host(std::uint32_t host_node, std::uint32_t pkt_idx) {
    auto& pkt = pool_[pkt_idx];
    pkt.route_pos = 1; // heading to route[1]
    enqueue_packet(host_node, 0, pkt_idx, kNoIngress);
}

void Simulation::host_receive(std::uint32_t host_node, std::uint32_t pkt_idx) {
    // Copy out and release immediately: reply allocation below may grow the
    // pool and invalidate references into it.
    const Packet pkt = pool_[pkt_idx];
    pool_.release(pkt_idx);
    const SimTime now = engine_.now();

    switch (pkt.kind) {
        case PacketKind::Pause:
            nodes_[host_node].queues[0].paused = true;
            return;
        case PacketKind::Resume:
            nodes_[host_node].queues[0].paused = false;
            start_dequeue(host_node, 0);
            nic_try_send(host_node);
            return;
        default:
            break;
    }

    auto& qp = qps_[pkt.qp];

    if (pkt.kind == PacketKind::Data) {
        const auto res = qp_on_receive_data(qp, pkt.psn);
        if (res.delivered) metrics_.delivered_unique_bytes += pkt.size;

        bool reply_now = true;
        if (res.delivered && res.reply == RecvReply::Ack) {
            qp.delivered_since_ack++;
            reply_now = pkt.ack_req || qp.delivered_since_ack >= cfg_.ack_coalescing;
            if (reply_now) qp.delivered_since_ack = 0;
        }
        if (reply_now) {
            const auto reply_idx = pool_.alloc();
            auto& reply = pool_[reply_idx];
            reply.kind = res.reply == RecvReply::Nak ? PacketKind::Nak : PacketKind::Ack;
            reply.ft = FiveTuple{pkt.ft.dst_host, pkt.ft.src_host, pkt.ft.src_port,
                                 pkt.ft.dst_port, pkt.ft.protocol};
            reply.psn = res.reply_psn;
            reply.size = kControlPacketBytes;
            reply.qp = pkt.qp;
            reply.path_tag = pkt.path_tag;
            reply.conga_metric = pkt.conga_metric;
            reply.explicit_route = true;
            reply.route_len = pkt.route_len;
            for (int i = 0; i < pkt.route_len; ++i)
                reply.route[i] = pkt.route[pkt.route_len - 1 - i];
            send_control_from_host(host_node, reply_idx);
        }

        if (res.delivered && pkt.ecn_marked) {
            if (!qp.cnp_seen || now - qp.last_cnp_out >= cfg_.dcqcn.cnp_window) {
                qp.cnp_seen = true;
                qp.last_cnp_out = now;
                const auto cnp_idx = pool_.alloc();
                auto& cnp = pool_[cnp_idx];
                cnp.kind = PacketKind::Cnp;
                cnp.ft = FiveTuple{pkt.ft.dst_host, pkt.ft.src_host, pkt.ft.src_port,
                                   pkt.ft.dst_port, pkt.ft.protocol};
                cnp.size = kControlPacketBytes;
                cnp.qp = pkt.qp;
                cnp.explicit_route = true;
                cnp.route_len = pkt.route_len;
                for (int i = 0; i < pkt.route_len; ++i)
                    cnp.route[i] = pkt.route[pkt.route_len - 1 - i];
                ++metrics_.cnp_packets;
                send_control_from_host(host_node, cnp_idx);
            }
        }
        return;
    }

    if (pkt.kind == PacketKind::Ack) {
        // CONGA-lite: the ack carries the worst egress occupancy its data
        // packet saw; book it against the path at this host's ToR.
        if (cfg_.scheme == SchemeKind::CongaLite && pkt.path_tag != 0) {
            const auto src_tor = host_tor_dense_[host_node];
            const auto data_dst_tor = host_tor_dense_[pkt.ft.src_host];
            nodes_[src_tor].conga.feed(data_dst_tor, pkt.path_tag,
                                       static_cast<double>(pkt.conga_metric), now);
        }
        const auto res = qp_on_ack(qp, pkt.psn);
        if (res.progressed) {
            qp.last_progress = now;
            for (auto sub_idx : res.completed_subwqes) handle_subwqe_acked(sub_idx);
            nic_try_send(host_node);
        }
        return;
    }

    if (pkt.kind == PacketKind::Nak) {
        if (qp_on_nak(qp, pkt.psn)) {
            qp.last_progress = now;
            qp.last_rewind_rto = false;
            nic_try_send(host_node);
        }
        return;
    }

    if (pkt.kind == PacketKind::Cnp) {
        on_cnp(pkt.qp);
        return;
    }

    throw SimAbort("unexpected packet kind at host");
}

void Simulation::handle_subwqe_acked(std::uint32_t subwqe_idx) {
    auto& sub = subwqes_[subwqe_idx];
    auto& pair = pairs_[sub.pair];
    auto it = pair.active.find(sub.wqe_id);
    if (it == pair.active.end()) throw SimAbort("sub-WQE completion for an unknown WQE");
    const auto cqe = bitmap_complete(it->second.bitmap, sub.index, engine_.now());
    if (!cqe) return;

    FlowRecord rec;
    rec.wqe_id = it->second.wqe.wqe_id;
    rec.src_host = pair.src;
    rec.dst_host = pair.dst;
    rec.size_bytes = it->second.wqe.size;
    rec.start = it->second.wqe.submit_time;
    rec.end = cqe->complete_time;
    rec.retransmitted_bytes = it->second.retx_bytes;
    rec.slowdown = fct_slowdown(rec, pair.ideal_rate_bps, pair.base_rtt);
    metrics_.flows.push_back(rec);

    pair.active.erase(it);
    pump_pair(sub.pair);
}

void Simulation::arm_rto(std::uint32_t qp_id) {
    auto& qp = qps_[qp_id];
    if (qp.rto_pending || cfg_.rto == 0) return;
    qp.rto_pending = true;
    qp.last_progress = engine_.now();
    engine_.schedule(engine_.now() + cfg_.rto, EventKind::TimerExpiry, 0, 0, qp_id,
                     TimerKind::RetransmitCheck);
}

void Simulation::on_rto_check(std::uint32_t qp_id) {
    auto& qp = qps_[qp_id];
    qp.rto_pending = false;
    if (qp.snd_una == qp.next_psn) return; // idle; re-armed on next post
    const SimTime quiet_deadline = qp.last_progress + cfg_.rto;
    if (engine_.now() >= quiet_deadline) {
        // Feedback died (drops without PFC); go back to the oldest
        // unacknowledged segment.
        while (qp.snd_nxt != qp.snd_una) {
            qp.snd_nxt = psn_sub(qp.snd_nxt, 1);
            qp.outstanding_bytes -= qp.segment_at(qp.snd_nxt).bytes;
        }
        qp.last_rewind_rto = true;
        qp.last_progress = engine_.now();
        nic_try_send(qp.ft.src_host);
    }
    qp.rto_pending = true;
    engine_.schedule(std::max(quiet_deadline, engine_.now() + cfg_.rto),
                     EventKind::TimerExpiry, 0, 0, qp_id, TimerKind::RetransmitCheck);
}

void Simulation::on_cnp(std::uint32_t qp_id) {
    auto& qp = qps_[qp_id];
    qp.last_cnp_in = engine_.now();
    dcqcn_on_congestion_notification(qp.dcqcn, cfg_.dcqcn);
    if (!qp.dcqcn.timers_armed) {
        qp.dcqcn.timers_armed = true;
        engine_.schedule(engine_.now() + cfg_.dcqcn.alpha_timer, EventKind::TimerExpiry,
                         0, 0, qp_id, TimerKind::DcqcnAlpha);
        engine_.schedule(engine_.now() + cfg_.dcqcn.rate_timer, EventKind::TimerExpiry,
                         0, 0, qp_id, TimerKind::DcqcnRateIncrease);
    }
}

void Simulation::on_dcqcn_alpha(std::uint32_t qp_id) {
    auto& qp = qps_[qp_id];
    if (!qp.dcqcn.timers_armed) return;
    if (engine_.now() - qp.last_cnp_in >= cfg_.dcqcn.alpha_timer)
        dcqcn_alpha_tick(qp.dcqcn, cfg_.dcqcn);
    if (qp.dcqcn.fully_recovered()) {
        qp.dcqcn.timers_armed = false;
        return;
    }
    engine_.schedule(engine_.now() + cfg_.dcqcn.alpha_timer, EventKind::TimerExpiry, 0, 0,
                     qp_id, TimerKind::DcqcnAlpha);
}

void Simulation::on_dcqcn_rate(std::uint32_t qp_id) {
    auto& qp = qps_[qp_id];
    if (!qp.dcqcn.timers_armed) return;
    if (engine_.now() - qp.last_cnp_in >= cfg_.dcqcn.rate_timer) {
        dcqcn_rate_increase_tick(qp.dcqcn, cfg_.dcqcn);
        nic_try_send(qp.ft.src_host);
    }
    if (qp.dcqcn.fully_recovered()) {
        qp.dcqcn.timers_armed = false;
        return;
    }
    engine_.schedule(engine_.now() + cfg_.dcqcn.rate_timer, EventKind::TimerExpiry, 0, 0,
                     qp_id, TimerKind::DcqcnRateIncrease);
}

// ---------------------------------------------------------------- switching

void Simulation::switch_receive(std::uint32_t node, std::uint32_t ingress_port,
                                std::uint32_t pkt_idx) {
    auto& pkt = pool_[pkt_idx];

    if (pkt.kind == PacketKind::Pause || pkt.kind == PacketKind::Resume) {
        auto& q = nodes_[node].queues[ingress_port];
        q.paused = pkt.kind == PacketKind::Pause;
        pool_.release(pkt_idx);
        if (!q.paused) start_dequeue(node, ingress_port);
        return;
    }

    if (pkt.kind == PacketKind::Congestion && pkt.ft.dst_host == node) {
        nodes_[node].congestion_table.on_congestion_packet(
            pkt.ft.src_host, pkt.path_tag, engine_.now(), cfg_.phi);
        congestion_trace_.push_back(CongestionTraceRecord{
            static_cast<std::uint8_t>(PacketKind::Congestion), pkt.path_tag,
            static_cast<std::uint16_t>(pkt.ft.src_host),
            static_cast<std::uint16_t>(pkt.ft.dst_host)});
        pool_.release(pkt_idx);
        return;
    }

    if (pkt.kind == PacketKind::Data && cfg_.scheme == SchemeKind::SeqBalance &&
        pkt.ecn_marked && node == host_tor_dense_[pkt.ft.dst_host])
        emit_congestion_packet(node, pkt);

    forward_packet(node, ingress_port, pkt_idx);
}

void Simulation::emit_congestion_packet(std::uint32_t dst_tor, const Packet& data) {
    if (data.path_tag == 0) throw SimAbort("marked data without a path tag at dst ToR");
    const auto tag = data.path_tag; // copy before alloc can move the pool
    const auto src_tor = host_tor_dense_[data.ft.src_host];
    auto& tor = nodes_[dst_tor];
    if (!tor.cp_limiter.allow(src_tor, tag, engine_.now())) return;

    const auto idx = pool_.alloc();
    auto& cp = pool_[idx];
    cp.kind = PacketKind::Congestion;
    // src/dst carry ToR ids for this control packet.
    cp.ft = FiveTuple{dst_tor, src_tor, static_cast<std::uint16_t>(tag), kRdmaDstPort,
                      253};
    cp.size = kControlPacketBytes;
    cp.path_tag = tag;
    cp.route_push(dst_tor);
    ++metrics_.congestion_packets;
    metrics_.congestion_wire_bytes += cp.size;
    forward_packet(dst_tor, kNoIngress, idx);
}

std::uint32_t Simulation::down_next_toward(std::uint32_t node, std::uint32_t target_tor) const {
    if (topo_.port_between(node, target_tor) >= 0) return target_tor;
    // 3-tier core: descend to the agg serving the target pod.
    for (auto p : topo_.nodes[node].down_ports) {
        const auto peer = topo_.nodes[node].ports[p].peer_node;
        if (topo_.nodes[peer].role == NodeRole::Agg &&
            topo_.pod_of[peer] == topo_.pod_of[target_tor])
            return peer;
    }
    throw SimAbort("no downward route toward target ToR");
}

std::uint32_t Simulation::pick_up_next(std::uint32_t node, std::uint32_t pkt_idx) {
    auto& pkt = pool_[pkt_idx];
    auto& st = nodes_[node];
    const auto& ups = topo_.nodes[node].up_ports;
    if (ups.empty()) throw SimAbort("no uplinks for an up decision");

    std::uint32_t choice;
    if (pkt.kind != PacketKind::Data) {
        choice = ecmp_select(pkt.ft, ups.size(), ecmp_salt_); // control follows ECMP
    } else {
        switch (cfg_.scheme) {
            case SchemeKind::Ecmp:
                choice = ecmp_select(pkt.ft, ups.size(), ecmp_salt_);
                break;
            case SchemeKind::LetFlow:
                choice = letflow_select(flow_hash(pkt.ft, 0), st.flowlets, engine_.now(),
                                        ups.size(), letflow_rng_);
                break;
            case SchemeKind::Drill: {
                scratch_occ_.resize(ups.size());
                for (std::size_t i = 0; i < ups.size(); ++i)
                    scratch_occ_[i] = st.queues[ups[i]].occupancy;
                choice = drill_select(scratch_occ_, cfg_.drill_d, st.drill, drill_rng_);
                break;
            }
            default:
                throw SimAbort("path-based scheme fell through to per-hop selection");
        }
    }
    return topo_.nodes[node].ports[ups[choice]].peer_node;
}

void Simulation::select_path_at_source_tor(std::uint32_t tor, Packet& pkt) {
    const auto dst_tor = host_tor_dense_[pkt.ft.dst_host];
    const auto& paths = topo_.paths_between(tor, dst_tor);
    auto& st = nodes_[tor];
    const std::uint64_t pin_key = pkt.ft.hash();

    const Path* path = nullptr;
    if (pkt.subflow_first) {
        if (cfg_.scheme == SchemeKind::SeqBalance) {
            const auto choice = seqbalance_source_select(
                pkt.ft, paths, st.congestion_table, dst_tor, engine_.now(), ecmp_salt_,
                cfg_.seqbalance_retries);
            if (choice.fallback) ++metrics_.seqbalance_fallbacks;
            path = &paths[choice.path_index];
        } else { // CONGA-lite
            if (auto sticky = st.flowlets.lookup(pin_key, engine_.now())) {
                path = &paths[*sticky];
            } else {
                const auto idx = conga_lite_pick(st.conga, dst_tor, paths, engine_.now());
                st.flowlets.record(pin_key, engine_.now(), idx);
                path = &paths[idx];
            }
        }
        st.pins[pin_key] = path;
    } else {
        if (cfg_.scheme == SchemeKind::CongaLite) {
            // Flowlet freshness is per packet; a long pause re-routes.
            if (auto sticky = st.flowlets.lookup(pin_key, engine_.now())) {
                path = &paths[*sticky];
            } else {
                const auto idx = conga_lite_pick(st.conga, dst_tor, paths, engine_.now());
                st.flowlets.record(pin_key, engine_.now(), idx);
                path = &paths[idx];
            }
            st.pins[pin_key] = path;
        } else {
            auto it = st.pins.find(pin_key);
            if (it == st.pins.end())
                throw SimAbort("sub-flow packet without a pinned path");
            path = it->second;
        }
    }

    pkt.path_tag = path->tag;
    for (std::size_t i = 1; i < path->nodes.size(); ++i)
        pkt.route_push(path->nodes[i]);
    pkt.route_push(pkt.ft.dst_host);
    pkt.explicit_route = true;
}

void Simulation::forward_packet(std::uint32_t node, std::uint32_t ingress_port,
                                std::uint32_t pkt_idx) {
    auto& pkt = pool_[pkt_idx];
    std::uint32_t next;

    if (pkt.explicit_route) {
        next = pkt.route[pkt.route_pos + 1];
        ++pkt.route_pos;
    } else if (pkt.kind == PacketKind::Congestion) {
        const auto target = pkt.ft.dst_host; // a ToR id
        if (topo_.port_between(node, target) >= 0 ||
            topo_.nodes[node].role == NodeRole::Core)
            next = down_next_toward(node, target);
        else
            next = pick_up_next(node, pkt_idx);
        pkt.route_push(next);
        pkt.route_pos = pkt.route_len - 1;
    } else {
        const auto dst_tor = host_tor_dense_[pkt.ft.dst_host];
        if (node == dst_tor) {
            next = pkt.ft.dst_host;
            pkt.route_push(next);
            pkt.route_pos = pkt.route_len - 1;
        } else if ((cfg_.scheme == SchemeKind::SeqBalance ||
                    cfg_.scheme == SchemeKind::CongaLite) &&
                   pkt.kind == PacketKind::Data && topo_.is_tor(node)) {
            select_path_at_source_tor(node, pkt);
            next = pkt.route[pkt.route_pos + 1];
            ++pkt.route_pos;
        } else {
            const bool reach_down =
                topo_.port_between(node, dst_tor) >= 0 ||
                (topo_.pod_of[node] >= 0 && topo_.nodes[node].role == NodeRole::Agg &&
                 topo_.pod_of[node] == topo_.pod_of[dst_tor]) ||
                topo_.nodes[node].role == NodeRole::Core ||
                topo_.nodes[node].role == NodeRole::Spine;
            if (reach_down)
                next = topo_.port_between(node, dst_tor) >= 0 ? dst_tor
                                                              : down_next_toward(node, dst_tor);
            else
                next = pick_up_next(node, pkt_idx);
            pkt.route_push(next);
            pkt.route_pos = pkt.route_len - 1;
        }
    }

    const int port = topo_.port_between(node, next);
    if (port < 0) throw SimAbort("forwarding toward a non-neighbor");
    enqueue_packet(node, static_cast<std::uint32_t>(port), pkt_idx, ingress_port);
}

void Simulation::enqueue_packet(std::uint32_t node, std::uint32_t port,
                                std::uint32_t pkt_idx, std::uint32_t ingress_port) {
    auto& q = nodes_[node].queues[port];
    auto& pkt = pool_[pkt_idx];
    const auto& link = topo_.nodes[node].ports[port].link;

    if (!cfg_.pfc.enabled && q.occupancy + pkt.size > link.queue_capacity_bytes) {
        ++metrics_.packets_dropped;
        pool_.release(pkt_idx);
        return;
    }

    const bool fabric_switch = !is_host(node);
    if (fabric_switch && pkt.kind == PacketKind::Data && cfg_.ecn.enabled()) {
        const double p = ecn_mark_probability(q.occupancy, cfg_.ecn);
        if (p > 0.0 && !pkt.ecn_marked && marking_rng_.next_double() < p) {
            pkt.ecn_marked = true;
            ++metrics_.ecn_marks;
        }
    }
    if (fabric_switch && pkt.kind == PacketKind::Data &&
        cfg_.scheme == SchemeKind::CongaLite &&
        !is_host(topo_.nodes[node].ports[port].peer_node))
        pkt.conga_metric = std::max(
            pkt.conga_metric, static_cast<std::uint32_t>(
                                  std::min<std::uint64_t>(q.occupancy, UINT32_MAX)));

    pkt.last_ingress = ingress_port == kNoIngress
                           ? 0xFFFF
                           : static_cast<std::uint16_t>(ingress_port);
    q.fifo.push_back(pkt_idx);
    q.occupancy += pkt.size;

    if (fabric_switch && ingress_port != kNoIngress) {
        auto& st = nodes_[node];
        st.ingress_bytes[ingress_port] += pkt.size;
        if (pfc_update(st.ingress_bytes[ingress_port], cfg_.pfc,
                       st.ingress_paused[ingress_port]) == PfcAction::Pause) {
            st.ingress_paused[ingress_port] = true;
            ++metrics_.pfc_pauses;
            send_pfc(node, ingress_port, true);
        }
    }

    if (!q.busy && !q.paused) start_dequeue(node, port);
}

void Simulation::start_dequeue(std::uint32_t node, std::uint32_t port) {
    auto& q = nodes_[node].queues[port];
    if (q.busy || q.paused || q.fifo.empty()) return;
    q.busy = true;
    const auto& pkt = pool_[q.fifo.front()];
    const auto& link = topo_.nodes[node].ports[port].link;
    engine_.schedule(engine_.now() + tx_time(pkt.size, link.capacity_bps),
                     EventKind::PacketDequeue, node, port);
}

void Simulation::on_dequeue_done(std::uint32_t node, std::uint32_t port) {
    auto& q = nodes_[node].queues[port];
    q.busy = false;
    const auto pkt_idx = q.fifo.front();
    q.fifo.pop_front();
    // Copy before the PFC path can allocate and move the pool.
    const auto size = pool_[pkt_idx].size;
    const auto ingress = pool_[pkt_idx].last_ingress;
    q.occupancy -= size;
    q.window_bytes += size;

    if (!is_host(node) && ingress != 0xFFFF) {
        auto& st = nodes_[node];
        st.ingress_bytes[ingress] -= size;
        if (pfc_update(st.ingress_bytes[ingress], cfg_.pfc,
                       st.ingress_paused[ingress]) == PfcAction::Resume) {
            st.ingress_paused[ingress] = false;
            send_pfc(node, ingress, false);
        }
    }

    const auto& out = topo_.nodes[node].ports[port];
    engine_.schedule(engine_.now() + out.link.propagation_delay, EventKind::PacketArrival,
                     out.peer_node, out.peer_port, pkt_idx);

    if (is_host(node)) nic_try_send(node);
    start_dequeue(node, port);
}

void Simulation::send_pfc(std::uint32_t node, std::uint32_t ingress_port, bool pause) {
    const auto& in = topo_.nodes[node].ports[ingress_port];
    const auto idx = pool_.alloc();
    auto& pkt = pool_[idx];
    pkt.kind = pause ? PacketKind::Pause : PacketKind::Resume;
    pkt.size = kControlPacketBytes;
    // Out-of-band control frame: propagation delay only, never queued.
    engine_.schedule(engine_.now() + in.link.propagation_delay, EventKind::PacketArrival,
                     in.peer_node, in.peer_port, idx);
}

// ---------------------------------------------------------------- metrics

void Simulation::on_metric_sample() {
    const SimTime now = engine_.now();
    for (auto tor : topo_.tors) {
        if (!topo_.nodes[tor].active) continue;
        const auto& ups = topo_.nodes[tor].up_ports;
        if (ups.empty()) continue;
        ImbalanceSample sample;
        sample.tor = tor;
        sample.window_start = now > cfg_.imbalance_window ? now - cfg_.imbalance_window : 0;
        bool any = false;
        for (auto p : ups) {
            const auto b = nodes_[tor].queues[p].window_bytes;
            sample.per_uplink_bytes.push_back(b);
            any = any || b > 0;
        }
        if (any) metrics_.imbalance.push_back(std::move(sample));
        for (auto p : ups) nodes_[tor].queues[p].window_bytes = 0;
    }
    delivered_series_.push_back(TimeSeriesPoint{now, metrics_.delivered_unique_bytes});
}

} // namespace lbsim
