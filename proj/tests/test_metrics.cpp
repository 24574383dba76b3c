#include <doctest.h>

#include <algorithm>

#include "lbsim/metrics.hpp"
#include "lbsim/rng.hpp"

using namespace lbsim;

TEST_CASE("slowdown is 1.0 when the flow finishes at the ideal time") {
    FlowRecord rec;
    rec.size_bytes = 1'000'000;
    rec.start = 0;
    rec.end = tx_time(rec.size_bytes, 100 * kGbps) + usec(4);
    CHECK(fct_slowdown(rec, 100 * kGbps, usec(4)) == doctest::Approx(1.0));
}

TEST_CASE("1MB at 100Gbps with 4us rtt finishing at 164us is ~1.95") {
    FlowRecord rec;
    rec.size_bytes = 1'000'000;
    rec.start = 0;
    rec.end = usec(164);
    // ideal = 80us serialization + 4us rtt.
    CHECK(fct_slowdown(rec, 100 * kGbps, usec(4)) == doctest::Approx(164.0 / 84.0));
}

TEST_CASE("slowdown below one aborts the run") {
    FlowRecord rec;
    rec.size_bytes = 1'000'000;
    rec.start = 0;
    rec.end = usec(10); // impossibly fast
    CHECK_THROWS_AS(fct_slowdown(rec, 100 * kGbps, usec(4)), SimAbort);
}

TEST_CASE("imbalance: equal, spread, and single-uplink cases") {
    CHECK(throughput_imbalance({0, 0, {5, 5, 5, 5}}) == doctest::Approx(0.0));
    CHECK(throughput_imbalance({0, 0, {10, 20, 30}}) == doctest::Approx(1.0));
    // Single active uplink of k over n uplinks: (k-0)/(k/n) = n.
    for (std::size_t n : {2u, 4u, 8u}) {
        std::vector<std::uint64_t> v(n, 0);
        v[0] = 7777;
        CHECK(throughput_imbalance({0, 0, v}) == doctest::Approx(static_cast<double>(n)));
    }
    CHECK_THROWS_AS(throughput_imbalance({0, 0, {0, 0}}), SimAbort);
}

TEST_CASE("nearest-rank percentile endpoints") {
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(i);
    CHECK(percentile(v, 100) == doctest::Approx(100));
    CHECK(percentile(v, 99) == doctest::Approx(99));
    CHECK(percentile(v, 50) == doctest::Approx(50));
    CHECK(percentile(v, 0) == doctest::Approx(1));
    CHECK_THROWS_AS(percentile({}, 50), SimAbort);
}

TEST_CASE("percentile matches the exhaustive sort oracle on random multisets") {
    SeededRng rng(31, 4);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = 1 + rng.next_below(500);
        std::vector<double> v;
        for (std::uint64_t i = 0; i < n; ++i)
            v.push_back(static_cast<double>(rng.next_below(50))); // duplicates likely
        auto sorted = v;
        std::sort(sorted.begin(), sorted.end());
        for (double p = 0; p <= 100; p += 7) {
            auto rank = static_cast<std::size_t>(
                std::ceil(p / 100.0 * static_cast<double>(n)));
            if (rank < 1) rank = 1;
            CHECK(percentile(v, p) == doctest::Approx(sorted[rank - 1]));
        }
    }
}

TEST_CASE("overhead rates derive from wire bytes over the horizon") {
    RunMetrics m;
    m.horizon = msec(100);
    m.data_wire_bytes = 1'000'000'000; // 1GB in 100ms = 80 Gbps
    m.congestion_wire_bytes = 6400;    // 51200 bits in 100ms = 512 Kbps
    CHECK(m.data_bps() == doctest::Approx(80e9));
    CHECK(m.congestion_bps() == doctest::Approx(512e3));
    CHECK(m.congestion_bps() / m.data_bps() < 0.001);

    RunMetrics quiet;
    quiet.horizon = msec(100);
    quiet.data_wire_bytes = 1'000'000;
    CHECK(quiet.congestion_bps() == 0.0);
}
