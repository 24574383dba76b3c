#include "lbsim/lb_schemes.hpp"

#include <algorithm>

namespace lbsim {

const char* scheme_name(SchemeKind k) {
    switch (k) {
        case SchemeKind::Ecmp: return "ecmp";
        case SchemeKind::LetFlow: return "letflow";
        case SchemeKind::CongaLite: return "conga_lite";
        case SchemeKind::Drill: return "drill";
        case SchemeKind::SeqBalance: return "seqbalance";
    }
    return "?";
}

std::optional<SchemeKind> scheme_from_name(const std::string& name) {
    if (name == "ecmp") return SchemeKind::Ecmp;
    if (name == "letflow") return SchemeKind::LetFlow;
    if (name == "conga_lite") return SchemeKind::CongaLite;
    if (name == "drill") return SchemeKind::Drill;
    if (name == "seqbalance") return SchemeKind::SeqBalance;
    return std::nullopt;
}

std::uint32_t drill_select(const std::vector<std::uint64_t>& queue_bytes,
                           std::uint32_t d, DrillState& state, SeededRng& rng) {
    const auto n = static_cast<std::uint32_t>(queue_bytes.size());
    bool have = state.has_memory;
    std::uint32_t best = have ? state.memory : 0;
    auto consider = [&](std::uint32_t i) {
        if (!have || queue_bytes[i] < queue_bytes[best]) {
            best = i;
            have = true;
        }
    };
    if (d >= n) {
        for (std::uint32_t i = 0; i < n; ++i) consider(i);
    } else if (n <= 64) {
        // d distinct random samples; rejection keeps the draw deterministic.
        std::uint64_t taken = 0;
        for (std::uint32_t i = 0; i < d; ++i) {
            std::uint32_t cand;
            do {
                cand = static_cast<std::uint32_t>(rng.next_below(n));
            } while (taken & (1ull << cand));
            taken |= 1ull << cand;
            consider(cand);
        }
    } else {
        for (std::uint32_t i = 0; i < d; ++i)
            consider(static_cast<std::uint32_t>(rng.next_below(n)));
    }
    state.memory = best;
    state.has_memory = true;
    return best;
}

std::uint32_t conga_lite_pick(const CongaLiteState& state, std::uint32_t dst_tor,
                              const std::vector<Path>& paths, SimTime now) {
    std::uint32_t best = 0;
    double best_metric = state.decayed(CongaLiteState::key(dst_tor, paths[0].tag), now);
    for (std::uint32_t i = 1; i < paths.size(); ++i) {
        const double m = state.decayed(CongaLiteState::key(dst_tor, paths[i].tag), now);
        if (m < best_metric) {
            best_metric = m;
            best = i; // strict <: ties stay with the lowest tag
        }
    }
    return best;
}

SeqBalanceChoice seqbalance_source_select(const FiveTuple& ft,
                                          const std::vector<Path>& paths,
                                          const CongestionTable& table,
                                          std::uint32_t dst_tor, SimTime now,
                                          std::uint64_t salt, std::uint32_t max_attempts) {
    for (std::uint32_t attempt = 0; attempt < max_attempts; ++attempt) {
        const auto idx =
            static_cast<std::uint32_t>(flow_hash(ft, salt, attempt) % paths.size());
        if (!table.is_inactive(dst_tor, paths[idx].tag, now))
            return SeqBalanceChoice{idx, false};
    }
    std::uint32_t best = 0;
    SimTime best_expiry = table.expiry(dst_tor, paths[0].tag);
    for (std::uint32_t i = 1; i < paths.size(); ++i) {
        const SimTime e = table.expiry(dst_tor, paths[i].tag);
        if (e < best_expiry) {
            best_expiry = e;
            best = i;
        }
    }
    return SeqBalanceChoice{best, true};
}

void encode_congestion_record(const CongestionTraceRecord& rec, std::uint8_t out[7]) {
    out[0] = rec.kind;
    const std::uint16_t tag = rec.path_tag & 0x03ff; // upper 6 bits zero
    out[1] = static_cast<std::uint8_t>(tag & 0xff);
    out[2] = static_cast<std::uint8_t>(tag >> 8);
    out[3] = static_cast<std::uint8_t>(rec.src_tor & 0xff);
    out[4] = static_cast<std::uint8_t>(rec.src_tor >> 8);
    out[5] = static_cast<std::uint8_t>(rec.dst_tor & 0xff);
    out[6] = static_cast<std::uint8_t>(rec.dst_tor >> 8);
}

CongestionTraceRecord decode_congestion_record(const std::uint8_t in[7]) {
    CongestionTraceRecord rec;
    rec.kind = in[0];
    rec.path_tag = static_cast<std::uint16_t>(in[1] | (in[2] << 8));
    rec.src_tor = static_cast<std::uint16_t>(in[3] | (in[4] << 8));
    rec.dst_tor = static_cast<std::uint16_t>(in[5] | (in[6] << 8));
    return rec;
}

} // namespace lbsim
