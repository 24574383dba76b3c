#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "lbsim/congestion.hpp"
#include "lbsim/packet.hpp"
#include "lbsim/sim_core.hpp"
#include "lbsim/time_types.hpp"

namespace lbsim {

// 24-bit PSN space with serial-number arithmetic; the send window stays below
// 2^23 so wraparound comparisons are unambiguous.
constexpr std::uint32_t kPsnMask = (1u << 24) - 1;
constexpr std::uint32_t kPsnHalf = 1u << 23;

inline std::uint32_t psn_add(std::uint32_t a, std::uint32_t d) { return (a + d) & kPsnMask; }
inline std::uint32_t psn_sub(std::uint32_t a, std::uint32_t b) { return (a - b) & kPsnMask; }
inline bool psn_less(std::uint32_t a, std::uint32_t b) {
    return a != b && psn_sub(b, a) < kPsnHalf;
}
inline bool psn_leq(std::uint32_t a, std::uint32_t b) { return a == b || psn_less(a, b); }

struct WorkQueueElement {
    std::uint64_t wqe_id = 0;
    std::uint64_t size = 0; // bytes, >= 1
    std::uint32_t src_host = 0;
    std::uint32_t dst_host = 0;
    SimTime submit_time = 0;
};

struct SubWqe {
    std::uint64_t parent = 0; // wqe_id
    std::uint32_t index = 0;  // 0..N-1
    std::uint64_t offset = 0; // byte offset in the parent message
    std::uint64_t size = 0;
    std::uint32_t qp = 0; // bound queue pair, set by the host layer
};

// Split a WQE into min(n, ceil(size/mtu)) contiguous sub-WQEs. Sizes are
// MTU-granular (only the chunk holding the message tail is ragged) and
// balanced: largest - smallest <= one MTU.
std::vector<SubWqe> shaper_split(const WorkQueueElement& wqe, std::uint32_t n,
                                 std::uint32_t mtu);

// Sender-side completion aggregation: one bit per sub-WQE, CQE exactly when
// the last bit sets.
struct AckBitmap {
    std::uint64_t wqe_id = 0;
    std::vector<bool> bits;
    std::uint32_t bits_set = 0;
    bool completed = false;
};

struct CompletionQueueElement {
    std::uint64_t wqe_id = 0;
    SimTime complete_time = 0;
};

// Sets bit `index`; returns a CQE iff that completes the bitmap. Setting the
// same bit twice is a logic error.
std::optional<CompletionQueueElement> bitmap_complete(AckBitmap& bitmap,
                                                      std::uint32_t index, SimTime now);

// One wire chunk of a sub-WQE; PSNs are assigned when segments are appended.
struct Segment {
    std::uint32_t subwqe = 0; // index into the run's sub-WQE table
    std::uint32_t bytes = 0;
    bool first_of_subwqe = false;
    bool last_of_subwqe = false;
};

struct QueuePair {
    std::uint32_t id = 0;
    FiveTuple ft;

    // Sender half.
    std::uint32_t next_psn = 0; // assigned to the next appended segment
    std::uint32_t snd_una = 0;  // oldest unacknowledged
    std::uint32_t snd_nxt = 0;  // next to (re)transmit; rewound by NAKs
    std::uint32_t sent_frontier = 0; // first never-transmitted PSN
    std::deque<Segment> window; // segments [snd_una, next_psn)
    std::uint64_t outstanding_bytes = 0; // sum over [snd_una, snd_nxt)
    std::uint64_t max_outstanding_bytes = 0;
    bool last_rewind_rto = false; // attributes retransmissions to NAK vs RTO

    DcqcnState dcqcn;
    std::uint64_t app_rate_cap_bps = 0; // 0 = uncapped
    SimTime next_send_time = 0;         // pacing credit
    SimTime last_cnp_in = 0;            // sender side, dedup not needed
    SimTime last_cnp_out = 0;           // receiver-side notification window
    bool cnp_seen = false;

    // Receiver half.
    std::uint32_t expected_psn = 0;
    std::uint32_t delivered_since_ack = 0;

    // Loss recovery fallback (NAKs handle reordering; the timer only fires
    // after drops eat the feedback entirely).
    SimTime last_progress = 0;
    bool rto_pending = false;

    // Scenario hook: PSN that may not enter the wire before hold_release.
    bool hold_armed = false;
    std::uint32_t hold_psn = 0;
    SimTime hold_release = 0;
    bool hold_started = false;
    bool hold_done = false;

    std::uint64_t paced_rate() const {
        if (app_rate_cap_bps == 0) return dcqcn.current_rate_bps;
        return std::min(dcqcn.current_rate_bps, app_rate_cap_bps);
    }
    bool has_unsent() const { return snd_nxt != next_psn; }
    bool window_open(std::uint32_t next_bytes) const {
        return outstanding_bytes + next_bytes <= max_outstanding_bytes;
    }
    const Segment& segment_at(std::uint32_t psn) const {
        return window[psn_sub(psn, snd_una)];
    }
};

// Appends segments for one sub-WQE (consecutive PSNs from next_psn).
void qp_post_subwqe(QueuePair& qp, std::uint32_t subwqe_index, std::uint64_t bytes,
                    std::uint32_t mtu);

enum class RecvReply : std::uint8_t { Ack, Nak, DupAck };

struct RecvDataResult {
    bool delivered = false;
    RecvReply reply = RecvReply::Ack;
    std::uint32_t reply_psn = 0;
};

// Go-Back-N receiver: in-sequence delivers and ACKs, ahead-of-sequence is
// discarded with NAK(expected), behind-of-sequence is a duplicate ACK.
RecvDataResult qp_on_receive_data(QueuePair& qp, std::uint32_t psn);

struct AckProcessResult {
    std::uint64_t released_bytes = 0;
    std::vector<std::uint32_t> completed_subwqes; // by table index
    bool progressed = false;
};

// Cumulative ACK up to `psn`; stale ACKs below the window are no-ops.
AckProcessResult qp_on_ack(QueuePair& qp, std::uint32_t psn);

// NAK rewinds the send pointer to `psn` (when it is inside the in-flight
// range) so everything from there on retransmits.
bool qp_on_nak(QueuePair& qp, std::uint32_t psn);

} // namespace lbsim
