#include <doctest.h>

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <vector>

#include "lbsim/rng.hpp"
#include "lbsim/transport.hpp"
#include "support/property_checks.hpp"

using namespace lbsim;

namespace {
WorkQueueElement wqe(std::uint64_t size) {
    return WorkQueueElement{1, size, 0, 1, 0};
}

std::vector<std::uint64_t> split_sizes(std::uint64_t size, std::uint32_t n,
                                       std::uint32_t mtu) {
    std::vector<std::uint64_t> out;
    for (const auto& sw : shaper_split(wqe(size), n, mtu)) out.push_back(sw.size);
    return out;
}
} // namespace

TEST_CASE("shaper splits a 1MB message into four equal 256KB sub-WQEs") {
    CHECK(split_sizes(1 << 20, 4, 1024) ==
          std::vector<std::uint64_t>{256 * 1024, 256 * 1024, 256 * 1024, 256 * 1024});
}

TEST_CASE("shaper with n=1 is the identity") {
    const auto subs = shaper_split(wqe(123457), 1, 1024);
    REQUIRE(subs.size() == 1);
    CHECK(subs[0].size == 123457);
    CHECK(subs[0].offset == 0);
}

TEST_CASE("10KB over four bins lands 3,3,2,2 KB") {
    CHECK(split_sizes(10 * 1024, 4, 1024) ==
          std::vector<std::uint64_t>{3 * 1024, 3 * 1024, 2 * 1024, 2 * 1024});
}

TEST_CASE("2.5KB over four bins yields three MTU-granular chunks") {
    CHECK(split_sizes(2560, 4, 1024) == std::vector<std::uint64_t>{1024, 1024, 512});
}

TEST_CASE("shaper split/merge round-trip and balance hold for random inputs") {
    SeededRng rng(11, 5);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::uint64_t size = 1 + rng.next_below(5'000'000);
        const auto n = static_cast<std::uint32_t>(1 + rng.next_below(8));
        const std::uint32_t mtu = 256 << rng.next_below(4);
        const auto subs = shaper_split(wqe(size), n, mtu);

        const std::uint64_t segments = (size + mtu - 1) / mtu;
        CHECK(subs.size() == std::min<std::uint64_t>(n, segments));

        std::uint64_t offset = 0, total = 0, mx = 0, mn = UINT64_MAX;
        for (const auto& sw : subs) {
            CHECK(sw.offset == offset); // contiguous: concatenation rebuilds the message
            offset += sw.size;
            total += sw.size;
            mx = std::max(mx, sw.size);
            mn = std::min(mn, sw.size);
        }
        CHECK(total == size);
        CHECK(mx - mn <= mtu);
    }
}

TEST_CASE("completion bitmap emits one CQE exactly when the last bit sets") {
    std::vector<std::uint32_t> order{0, 1, 2, 3};
    int checked = 0;
    do {
        AckBitmap bm{9, std::vector<bool>(4, false), 0, false};
        int cqes = 0;
        for (std::size_t i = 0; i < order.size(); ++i) {
            const auto cqe = bitmap_complete(bm, order[i], 100 + i);
            if (cqe) {
                ++cqes;
                CHECK(i == 3); // popcount oracle: only the 4th set completes
                CHECK(cqe->wqe_id == 9);
            }
        }
        CHECK(cqes == 1);
        CHECK(bm.completed);
        ++checked;
    } while (std::next_permutation(order.begin(), order.end()));
    CHECK(checked == 24);
}

TEST_CASE("single-bit bitmap completes immediately (plain RDMA equivalence)") {
    AckBitmap bm{5, std::vector<bool>(1, false), 0, false};
    const auto cqe = bitmap_complete(bm, 0, 77);
    REQUIRE(cqe.has_value());
    CHECK(cqe->complete_time == 77);
}

TEST_CASE("double completion of one sub-WQE is fatal") {
    AckBitmap bm{5, std::vector<bool>(2, false), 0, false};
    bitmap_complete(bm, 0, 1);
    CHECK_THROWS_AS(bitmap_complete(bm, 0, 2), SimAbort);
}

TEST_CASE("posted sub-WQE gets consecutive PSNs and MTU-sized segments") {
    QueuePair qp;
    qp_post_subwqe(qp, 0, 2560, 1024);
    REQUIRE(qp.window.size() == 3);
    CHECK(qp.next_psn == 3);
    CHECK(qp.window[0].bytes == 1024);
    CHECK(qp.window[1].bytes == 1024);
    CHECK(qp.window[2].bytes == 512);
    CHECK(qp.window[0].first_of_subwqe);
    CHECK(qp.window[2].last_of_subwqe);
}

TEST_CASE("receiver discipline: in-sequence, ahead, behind") {
    QueuePair qp;
    qp.expected_psn = 3;

    auto r = qp_on_receive_data(qp, 3);
    CHECK(r.delivered);
    CHECK(r.reply == RecvReply::Ack);
    CHECK(r.reply_psn == 3);
    CHECK(qp.expected_psn == 4);

    qp.expected_psn = 3;
    r = qp_on_receive_data(qp, 5);
    CHECK(!r.delivered);
    CHECK(r.reply == RecvReply::Nak);
    CHECK(r.reply_psn == 3);
    CHECK(qp.expected_psn == 3);

    r = qp_on_receive_data(qp, 2);
    CHECK(!r.delivered);
    CHECK(r.reply == RecvReply::DupAck);
    CHECK(r.reply_psn == 2);
    CHECK(qp.expected_psn == 3);
}

TEST_CASE("ack releases the window and reports sub-WQE completion") {
    QueuePair qp;
    qp_post_subwqe(qp, 7, 3072, 1024); // psn 0..2
    qp.snd_nxt = 3;
    qp.sent_frontier = 3;
    qp.outstanding_bytes = 3072;

    auto res = qp_on_ack(qp, 1);
    CHECK(res.progressed);
    CHECK(res.released_bytes == 2048);
    CHECK(res.completed_subwqes.empty());
    CHECK(qp.snd_una == 2);
    CHECK(qp.outstanding_bytes == 1024);

    res = qp_on_ack(qp, 2);
    REQUIRE(res.completed_subwqes.size() == 1);
    CHECK(res.completed_subwqes[0] == 7);
    CHECK(qp.outstanding_bytes == 0);

    // Stale ack below the window is a no-op.
    res = qp_on_ack(qp, 1);
    CHECK(!res.progressed);
}

TEST_CASE("nak rewinds the send pointer; 8 packets retransmit from psn 3") {
    QueuePair qp;
    qp_post_subwqe(qp, 0, 11 * 1024, 1024); // psn 0..10
    qp.snd_nxt = 11;
    qp.sent_frontier = 11;
    qp.outstanding_bytes = 11 * 1024;

    CHECK(qp_on_nak(qp, 3));
    CHECK(qp.snd_nxt == 3);
    // Replaying the window sends 3..10 again: exactly 8 packets.
    int resent = 0;
    while (qp.has_unsent()) {
        CHECK(psn_less(qp.snd_nxt, qp.sent_frontier));
        qp.snd_nxt = psn_add(qp.snd_nxt, 1);
        ++resent;
    }
    CHECK(resent == 8);

    // At/above the send pointer or below the window: stale, no rewind.
    qp.snd_nxt = 3;
    CHECK(!qp_on_nak(qp, 3));
    qp_on_ack(qp, 2);
    CHECK(!qp_on_nak(qp, 1));
}

TEST_CASE("psn arithmetic wraps at 24 bits") {
    CHECK(psn_add(kPsnMask, 1) == 0);
    CHECK(psn_less(kPsnMask, 0));
    CHECK(psn_less(kPsnMask - 5, 3));
    CHECK(!psn_less(3, kPsnMask - 5));

    QueuePair qp;
    qp.next_psn = qp.snd_una = qp.snd_nxt = qp.sent_frontier = kPsnMask - 1;
    qp.expected_psn = kPsnMask - 1;
    qp_post_subwqe(qp, 0, 4096, 1024); // psns 16777214, 16777215, 0, 1
    CHECK(qp.next_psn == 2);
    qp.snd_nxt = qp.sent_frontier = 2;
    qp.outstanding_bytes = 4096;
    const auto res = qp_on_ack(qp, 0); // cumulative across the wrap
    CHECK(res.released_bytes == 3072);
    CHECK(qp.snd_una == 1);
    CHECK(qp.outstanding_bytes == 1024);
}

TEST_CASE("gbn equals the oracle on every reordering of up to 6 packets") {
    for (int m = 2; m <= 6; ++m) {
        std::vector<int> order(m);
        std::iota(order.begin(), order.end(), 0);
        do {
            REQUIRE(props::gbn_case_matches(m, order));
        } while (std::next_permutation(order.begin(), order.end()));
    }
}

TEST_CASE("gbn equals the oracle on random traces up to 64 packets") {
    SeededRng rng(77, 8);
    for (int trial = 0; trial < 300; ++trial) {
        const int m = 2 + static_cast<int>(rng.next_below(63));
        std::vector<int> order(m);
        std::iota(order.begin(), order.end(), 0);
        for (int i = m - 1; i > 0; --i)
            std::swap(order[i], order[rng.next_below(static_cast<std::uint64_t>(i) + 1)]);
        REQUIRE(props::gbn_case_matches(m, order));
    }
}

TEST_CASE("queue pairs keep independent psn sequences") {
    QueuePair a, b;
    qp_post_subwqe(a, 0, 5 * 1024, 1024);
    qp_post_subwqe(b, 1, 2 * 1024, 1024);
    CHECK(a.next_psn == 5);
    CHECK(b.next_psn == 2);
    qp_on_receive_data(a, 0);
    CHECK(a.expected_psn == 1);
    CHECK(b.expected_psn == 0);
}

TEST_CASE("in-order arrival retransmits nothing") {
    std::vector<int> order(64);
    std::iota(order.begin(), order.end(), 0);
    const auto out = props::gbn_transport(64, order);
    CHECK(out.retransmissions == 0);
}
