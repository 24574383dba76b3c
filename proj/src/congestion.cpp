#include "lbsim/congestion.hpp"

#include <algorithm>

#include "lbsim/packet.hpp"

namespace lbsim {

const char* packet_kind_name(PacketKind k) {
    switch (k) {
        case PacketKind::Data: return "DATA";
        case PacketKind::Ack: return "ACK";
        case PacketKind::Nak: return "NAK";
        case PacketKind::Congestion: return "CONGESTION";
        case PacketKind::Pause: return "PAUSE";
        case PacketKind::Resume: return "RESUME";
        case PacketKind::Cnp: return "CNP";
    }
    return "?";
}

double ecn_mark_probability(std::uint64_t queue_bytes, const EcnConfig& cfg) {
    if (!cfg.enabled() || queue_bytes < cfg.k_min_bytes) return 0.0;
    if (queue_bytes >= cfg.k_max_bytes) return cfg.p_max;
    const double span = static_cast<double>(cfg.k_max_bytes - cfg.k_min_bytes);
    return cfg.p_max * static_cast<double>(queue_bytes - cfg.k_min_bytes) / span;
}

PfcAction pfc_update(std::uint64_t ingress_queue_bytes, const PfcConfig& cfg,
                     bool currently_paused) {
    if (!cfg.enabled) return PfcAction::None;
    if (!currently_paused && ingress_queue_bytes >= cfg.pause_threshold_bytes)
        return PfcAction::Pause;
    if (currently_paused && ingress_queue_bytes <= cfg.resume_threshold_bytes)
        return PfcAction::Resume;
    return PfcAction::None;
}

void dcqcn_on_congestion_notification(DcqcnState& s, const DcqcnConfig& cfg) {
    s.target_rate_bps = s.current_rate_bps;
    const double cut = 1.0 - s.alpha / 2.0;
    auto next = static_cast<std::uint64_t>(static_cast<double>(s.current_rate_bps) * cut);
    s.current_rate_bps = std::max(next, cfg.min_rate_bps);
    s.alpha = (1.0 - cfg.gain) * s.alpha + cfg.gain;
    s.stage = 0;
}

void dcqcn_alpha_tick(DcqcnState& s, const DcqcnConfig& cfg) {
    s.alpha = (1.0 - cfg.gain) * s.alpha;
}

void dcqcn_rate_increase_tick(DcqcnState& s, const DcqcnConfig& cfg) {
    ++s.stage;
    if (s.stage > cfg.fast_recovery_ticks) {
        const auto bump = (s.stage > 2 * cfg.fast_recovery_ticks) ? cfg.rate_hai_bps
                                                                  : cfg.rate_ai_bps;
        s.target_rate_bps = std::min(s.target_rate_bps + bump, s.link_rate_bps);
    }
    // Round up so integer halving actually reaches the target.
    s.current_rate_bps = (s.current_rate_bps + s.target_rate_bps + 1) / 2;
    s.current_rate_bps = std::min(s.current_rate_bps, s.link_rate_bps);
    s.current_rate_bps = std::max(s.current_rate_bps, cfg.min_rate_bps);
}

} // namespace lbsim
