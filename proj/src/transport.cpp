#include "lbsim/transport.hpp"

#include <algorithm>

namespace lbsim {

std::vector<SubWqe> shaper_split(const WorkQueueElement& wqe, std::uint32_t n,
                                 std::uint32_t mtu) {
    if (wqe.size < 1) throw SimAbort("shaper_split: empty WQE");
    if (n < 1 || mtu < 256) throw SimAbort("shaper_split: need n >= 1 and mtu >= 256");

    const std::uint64_t segments = (wqe.size + mtu - 1) / mtu;
    const auto k = static_cast<std::uint32_t>(
        std::min<std::uint64_t>(n, segments));
    const std::uint64_t q = segments / k;
    const std::uint64_t r = segments % k;
    const std::uint64_t tail = wqe.size - (segments - 1) * mtu; // last segment bytes

    // Per-chunk segment counts. Whole-MTU chunks go first; when the message
    // tail is ragged the chunk holding it must be a (q+1)-chunk or the
    // largest-smallest bound breaks, so one ceil chunk moves to the end.
    std::vector<std::uint64_t> counts;
    counts.reserve(k);
    if (tail == mtu || r == 0) {
        for (std::uint32_t i = 0; i < k; ++i) counts.push_back(i < r ? q + 1 : q);
    } else {
        for (std::uint32_t i = 0; i + 1 < r; ++i) counts.push_back(q + 1);
        for (std::uint32_t i = 0; i < k - r; ++i) counts.push_back(q);
        counts.push_back(q + 1);
    }

    std::vector<SubWqe> out;
    out.reserve(k);
    std::uint64_t offset = 0;
    for (std::uint32_t i = 0; i < k; ++i) {
        SubWqe sw;
        sw.parent = wqe.wqe_id;
        sw.index = i;
        sw.offset = offset;
        sw.size = counts[i] * mtu;
        if (i + 1 == k) sw.size = wqe.size - offset; // absorb the ragged tail
        offset += sw.size;
        out.push_back(sw);
    }
    return out;
}

std::optional<CompletionQueueElement> bitmap_complete(AckBitmap& bitmap,
                                                      std::uint32_t index, SimTime now) {
    if (index >= bitmap.bits.size()) throw SimAbort("bitmap_complete: index out of range");
    if (bitmap.bits[index]) throw SimAbort("bitmap_complete: sub-WQE completed twice");
    bitmap.bits[index] = true;
    ++bitmap.bits_set;
    if (bitmap.bits_set == bitmap.bits.size()) {
        bitmap.completed = true;
        return CompletionQueueElement{bitmap.wqe_id, now};
    }
    return std::nullopt;
}

void qp_post_subwqe(QueuePair& qp, std::uint32_t subwqe_index, std::uint64_t bytes,
                    std::uint32_t mtu) {
    std::uint64_t left = bytes;
    bool first = true;
    while (left > 0) {
        const auto chunk = static_cast<std::uint32_t>(std::min<std::uint64_t>(left, mtu));
        left -= chunk;
        qp.window.push_back(Segment{subwqe_index, chunk, first, left == 0});
        first = false;
        qp.next_psn = psn_add(qp.next_psn, 1);
        if (qp.window.size() >= kPsnHalf)
            throw SimAbort("qp window would exceed half the PSN space");
    }
}

RecvDataResult qp_on_receive_data(QueuePair& qp, std::uint32_t psn) {
    RecvDataResult res;
    if (psn == qp.expected_psn) {
        qp.expected_psn = psn_add(qp.expected_psn, 1);
        res.delivered = true;
        res.reply = RecvReply::Ack;
        res.reply_psn = psn;
    } else if (psn_less(qp.expected_psn, psn)) {
        res.delivered = false;
        res.reply = RecvReply::Nak;
        res.reply_psn = qp.expected_psn;
    } else {
        res.delivered = false; // duplicate of something already delivered
        res.reply = RecvReply::DupAck;
        res.reply_psn = psn_sub(qp.expected_psn, 1);
    }
    return res;
}

AckProcessResult qp_on_ack(QueuePair& qp, std::uint32_t psn) {
    AckProcessResult res;
    if (qp.window.empty() || psn_less(psn, qp.snd_una)) return res; // stale
    if (!psn_less(psn, qp.next_psn)) throw SimAbort("ack beyond posted segments");

    while (psn_leq(qp.snd_una, psn)) {
        Segment seg = qp.window.front();
        qp.window.pop_front();
        // Only segments below the send pointer are counted outstanding; a
        // rewound pointer may sit below what this ack releases.
        if (psn_less(qp.snd_una, qp.snd_nxt)) qp.outstanding_bytes -= seg.bytes;
        if (seg.last_of_subwqe) res.completed_subwqes.push_back(seg.subwqe);
        qp.snd_una = psn_add(qp.snd_una, 1);
        res.released_bytes += seg.bytes;
    }
    if (psn_less(qp.snd_nxt, qp.snd_una)) {
        // The cumulative ack overtook a rewound send pointer.
        qp.snd_nxt = qp.snd_una;
        qp.outstanding_bytes = 0;
    }
    res.progressed = true;
    return res;
}

bool qp_on_nak(QueuePair& qp, std::uint32_t psn) {
    if (psn_less(psn, qp.snd_una) || !psn_less(psn, qp.snd_nxt)) return false;
    // Walk the send pointer back; bytes in (psn, snd_nxt) leave the window
    // accounting because they will be transmitted again.
    while (qp.snd_nxt != psn) {
        qp.snd_nxt = psn_sub(qp.snd_nxt, 1);
        qp.outstanding_bytes -= qp.segment_at(qp.snd_nxt).bytes;
    }
    return true;
}

} // namespace lbsim
