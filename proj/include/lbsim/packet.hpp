#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lbsim/time_types.hpp"
#include "lbsim/topology.hpp"

namespace lbsim {

// Wire kind ids are part of the trace format; keep the values stable.
enum class PacketKind : std::uint8_t {
    Data = 0,
    Ack = 1,
    Nak = 2,
    Congestion = 3,
    Pause = 4,
    Resume = 5,
    Cnp = 6,
};

const char* packet_kind_name(PacketKind k);

constexpr std::uint32_t kControlPacketBytes = 64; // minimum Ethernet frame
constexpr std::uint32_t kRdmaDstPort = 4791;      // RoCEv2 UDP port

struct FiveTuple {
    std::uint32_t src_host = 0;
    std::uint32_t dst_host = 0;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = kRdmaDstPort;
    std::uint8_t protocol = 17; // UDP

    bool operator==(const FiveTuple&) const = default;

    std::uint64_t hash() const {
        std::uint64_t h = (static_cast<std::uint64_t>(src_host) << 32) | dst_host;
        h ^= (static_cast<std::uint64_t>(src_port) << 24) ^
             (static_cast<std::uint64_t>(dst_port) << 8) ^ protocol;
        return h;
    }
};

// Longest minimal route: host-tor-agg-core-agg-tor-host.
constexpr int kMaxRouteNodes = 8;

struct Packet {
    PacketKind kind = PacketKind::Data;
    FiveTuple ft;
    std::uint32_t psn = 0;      // DATA sequence / ACK cumulative / NAK expected
    std::uint32_t size = 0;     // bytes on the wire
    std::uint16_t path_tag = 0; // 0 = untagged
    bool ecn_marked = false;
    bool subflow_first = false; // first DATA packet of a sub-flow
    bool ack_req = false;       // last DATA packet of a sub-WQE
    std::uint32_t qp = 0;       // owning queue pair index
    std::uint32_t conga_metric = 0; // max egress occupancy seen en route

    // Route bookkeeping. DATA under end-to-end schemes is prefilled from the
    // chosen Path; hop-by-hop schemes append as they forward. Control packets
    // (ACK/NAK/CNP) carry the exact reverse of the data route.
    std::array<std::uint16_t, kMaxRouteNodes> route{};
    std::uint8_t route_len = 0;
    std::uint8_t route_pos = 0;
    bool explicit_route = false;
    std::uint16_t last_ingress = 0xFFFF; // PFC attribution at the current switch

    void route_push(std::uint32_t node) {
        route[route_len++] = static_cast<std::uint16_t>(node);
    }
};

// Recycling pool; a run owns one. Indices travel inside events.
class PacketPool {
public:
    std::uint32_t alloc() {
        if (!free_.empty()) {
            const auto idx = free_.back();
            free_.pop_back();
            slots_[idx] = Packet{};
            return idx;
        }
        slots_.emplace_back();
        return static_cast<std::uint32_t>(slots_.size() - 1);
    }
    void release(std::uint32_t idx) { free_.push_back(idx); }
    Packet& operator[](std::uint32_t idx) { return slots_[idx]; }
    const Packet& operator[](std::uint32_t idx) const { return slots_[idx]; }
    std::size_t live() const { return slots_.size() - free_.size(); }

private:
    std::vector<Packet> slots_;
    std::vector<std::uint32_t> free_;
};

} // namespace lbsim
