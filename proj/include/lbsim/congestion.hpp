#pragma once

#include <cstdint>

#include "lbsim/time_types.hpp"

namespace lbsim {

// RED-style marking ramp, (Kmin, Kmax, Pmax).
struct EcnConfig {
    std::uint64_t k_min_bytes = 0;
    std::uint64_t k_max_bytes = 0;
    double p_max = 0.0;

    bool enabled() const { return k_max_bytes > 0 && p_max > 0.0; }
};

// 0 below k_min, p_max at/above k_max, linear in between.
double ecn_mark_probability(std::uint64_t queue_bytes, const EcnConfig& cfg);

struct PfcConfig {
    bool enabled = true;
    std::uint64_t pause_threshold_bytes = 512 * 1024;
    std::uint64_t resume_threshold_bytes = 384 * 1024;
};

enum class PfcAction : std::uint8_t { None, Pause, Resume };

// Threshold crossings on per-ingress attributed bytes.
PfcAction pfc_update(std::uint64_t ingress_queue_bytes, const PfcConfig& cfg,
                     bool currently_paused);

// Canonical DCQCN constants; the marking triple is the only knob the
// reference configuration pins, everything else keeps textbook defaults.
struct DcqcnConfig {
    double gain = 1.0 / 16.0;            // g
    SimTime alpha_timer = usec(55);
    SimTime rate_timer = usec(55);
    std::uint32_t fast_recovery_ticks = 5; // F
    std::uint64_t rate_ai_bps = 40 * kMbps;
    std::uint64_t rate_hai_bps = 400 * kMbps;
    std::uint64_t min_rate_bps = 1 * kMbps;
    SimTime cnp_window = usec(50); // min gap between notifications per QP
};

struct DcqcnState {
    std::uint64_t current_rate_bps = 0;
    std::uint64_t target_rate_bps = 0;
    std::uint64_t link_rate_bps = 0;
    double alpha = 1.0;
    std::uint32_t stage = 0; // rate-increase ticks since the last cut
    bool timers_armed = false;

    void init(std::uint64_t link_bps) {
        link_rate_bps = link_bps;
        current_rate_bps = link_bps;
        target_rate_bps = link_bps;
        alpha = 1.0;
        stage = 0;
        timers_armed = false;
    }
    bool fully_recovered() const {
        return current_rate_bps >= link_rate_bps && target_rate_bps >= link_rate_bps;
    }
};

// Rate cut on a congestion notification:
//   target <- current; current <- current*(1 - alpha/2); alpha <- (1-g)alpha + g
void dcqcn_on_congestion_notification(DcqcnState& s, const DcqcnConfig& cfg);

// Quiet alpha timer tick: alpha <- (1-g)*alpha.
void dcqcn_alpha_tick(DcqcnState& s, const DcqcnConfig& cfg);

// Quiet rate-increase tick: fast recovery for the first F ticks, additive
// increase for the next F, hyper increase after that.
void dcqcn_rate_increase_tick(DcqcnState& s, const DcqcnConfig& cfg);

} // namespace lbsim
