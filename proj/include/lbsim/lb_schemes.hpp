#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "lbsim/packet.hpp"
#include "lbsim/rng.hpp"
#include "lbsim/sim_core.hpp"
#include "lbsim/time_types.hpp"
#include "lbsim/topology.hpp"

namespace lbsim {

enum class SchemeKind : std::uint8_t { Ecmp, LetFlow, CongaLite, Drill, SeqBalance };

const char* scheme_name(SchemeKind k);
std::optional<SchemeKind> scheme_from_name(const std::string& name);

inline std::uint64_t flow_hash(const FiveTuple& ft, std::uint64_t salt,
                               std::uint32_t attempt = 0) {
    return SeededRng::mix(ft.hash() ^ SeededRng::mix(salt + attempt));
}

// Deterministic five-tuple hash over the uplink set.
inline std::uint32_t ecmp_select(const FiveTuple& ft, std::size_t n_uplinks,
                                 std::uint64_t salt) {
    return static_cast<std::uint32_t>(flow_hash(ft, salt) % n_uplinks);
}

// Flowlet stickiness shared by LetFlow and CONGA-lite: an entry is fresh iff
// now - last_seen <= gap. The caller decides what a new flowlet picks.
struct FlowletTable {
    struct Entry {
        SimTime last_seen = 0;
        std::uint32_t choice = 0;
    };
    SimTime gap = usec(100);
    std::unordered_map<std::uint64_t, Entry> entries;

    // Returns the sticky choice, or nullopt when a new flowlet starts.
    std::optional<std::uint32_t> lookup(std::uint64_t key, SimTime now) {
        auto it = entries.find(key);
        if (it == entries.end() || now - it->second.last_seen > gap) return std::nullopt;
        it->second.last_seen = now;
        return it->second.choice;
    }
    void record(std::uint64_t key, SimTime now, std::uint32_t choice) {
        entries[key] = Entry{now, choice};
    }
};

inline std::uint32_t letflow_select(std::uint64_t flow_key, FlowletTable& table,
                                    SimTime now, std::size_t n_uplinks, SeededRng& rng) {
    if (auto sticky = table.lookup(flow_key, now)) return *sticky;
    const auto pick = static_cast<std::uint32_t>(rng.next_below(n_uplinks));
    table.record(flow_key, now, pick);
    return pick;
}

// DRILL: d random samples plus the remembered best, minimum occupancy wins,
// remembered port wins ties.
struct DrillState {
    std::uint32_t memory = 0;
    bool has_memory = false;
};

std::uint32_t drill_select(const std::vector<std::uint64_t>& queue_bytes,
                           std::uint32_t d, DrillState& state, SeededRng& rng);

// CONGA-lite: per-path congestion metric = exponentially decayed max of the
// egress occupancies seen along the path, fed back by returning ACKs.
struct CongaLiteState {
    SimTime half_life = usec(100);

    struct Cell {
        double value = 0.0;
        SimTime updated = 0;
    };
    std::map<std::uint64_t, Cell> metric; // (dst_tor<<16)|tag

    static std::uint64_t key(std::uint32_t dst_tor, PathTag tag) {
        return (static_cast<std::uint64_t>(dst_tor) << 16) | tag;
    }
    double decayed(std::uint64_t k, SimTime now) const {
        auto it = metric.find(k);
        if (it == metric.end()) return 0.0;
        const double dt = static_cast<double>(now - it->second.updated);
        return it->second.value * std::exp2(-dt / static_cast<double>(half_life));
    }
    void feed(std::uint32_t dst_tor, PathTag tag, double sample, SimTime now) {
        auto& cell = metric[key(dst_tor, tag)];
        const double dt = static_cast<double>(now - cell.updated);
        const double cur = cell.value * std::exp2(-dt / static_cast<double>(half_life));
        cell.value = std::max(cur, sample);
        cell.updated = now;
    }
};

// New-flowlet path choice: argmin decayed metric, ties to the lowest tag.
std::uint32_t conga_lite_pick(const CongaLiteState& state, std::uint32_t dst_tor,
                              const std::vector<Path>& paths, SimTime now);

// Source-ToR map from (dst ToR, PathTag) to the time until which the path is
// considered inactive. Refresh restarts the clock and never shortens it.
struct CongestionTable {
    std::map<std::uint64_t, SimTime> inactive_until;

    static std::uint64_t key(std::uint32_t dst_tor, PathTag tag) {
        return (static_cast<std::uint64_t>(dst_tor) << 16) | tag;
    }
    bool is_inactive(std::uint32_t dst_tor, PathTag tag, SimTime now) const {
        auto it = inactive_until.find(key(dst_tor, tag));
        return it != inactive_until.end() && now < it->second;
    }
    SimTime expiry(std::uint32_t dst_tor, PathTag tag) const {
        auto it = inactive_until.find(key(dst_tor, tag));
        return it == inactive_until.end() ? 0 : it->second;
    }
    void on_congestion_packet(std::uint32_t dst_tor, PathTag tag, SimTime now, SimTime phi) {
        auto& slot = inactive_until[key(dst_tor, tag)];
        const SimTime refreshed = now + phi;
        if (refreshed < slot)
            throw SimAbort("congestion table refresh would shorten inactive_until");
        slot = refreshed;
    }
};

struct SeqBalanceChoice {
    std::uint32_t path_index = 0;
    bool fallback = false; // all candidates inactive, earliest expiry picked
};

// Rehash up to `max_attempts` times skipping inactive paths; if everything is
// inactive fall back to the path whose inactivity expires first.
SeqBalanceChoice seqbalance_source_select(const FiveTuple& ft,
                                          const std::vector<Path>& paths,
                                          const CongestionTable& table,
                                          std::uint32_t dst_tor, SimTime now,
                                          std::uint64_t salt, std::uint32_t max_attempts);

// Destination-ToR side: one Congestion Packet per (src ToR, tag) per dedup
// window. Window 0 disables dedup (one per marked packet).
struct CongestionPacketLimiter {
    SimTime window = 0;
    std::map<std::uint64_t, SimTime> last_sent;

    bool allow(std::uint32_t src_tor, PathTag tag, SimTime now) {
        const auto k = (static_cast<std::uint64_t>(src_tor) << 16) | tag;
        auto it = last_sent.find(k);
        if (it != last_sent.end() && window > 0 && now - it->second < window) return false;
        last_sent[k] = now;
        return true;
    }
};

// On-disk record layout for CONGESTION packets: kind byte, 10-bit tag in a
// 16-bit little-endian field (upper 6 bits zero), source and destination ToR
// ids as 16-bit little-endian. 7 bytes total.
struct CongestionTraceRecord {
    std::uint8_t kind = static_cast<std::uint8_t>(PacketKind::Congestion);
    std::uint16_t path_tag = 0;
    std::uint16_t src_tor = 0;
    std::uint16_t dst_tor = 0;
};
constexpr std::size_t kCongestionTraceRecordBytes = 7;

void encode_congestion_record(const CongestionTraceRecord& rec, std::uint8_t out[7]);
CongestionTraceRecord decode_congestion_record(const std::uint8_t in[7]);

} // namespace lbsim
