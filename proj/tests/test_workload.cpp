#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "lbsim/workload.hpp"

using namespace lbsim;

namespace {
Topology two_racks(std::uint32_t hosts_per_leaf, std::uint64_t host_gbps) {
    const LinkSpec link{host_gbps * kGbps, 1000, 2'000'000};
    return build_leaf_spine(2, 2, hosts_per_leaf, link, link);
}
} // namespace

TEST_CASE("single-point cdf always returns that size") {
    const auto cdf = FlowSizeCdf::from_points({{1 << 20, 1.0}});
    SeededRng rng(1, 1);
    for (int i = 0; i < 1000; ++i) CHECK(cdf.sample(rng) == 1 << 20);
    CHECK(cdf.mean_bytes() == doctest::Approx(1 << 20));
}

TEST_CASE("empirical median of a two-point cdf lands within 2%") {
    // Median at 10KB by construction: mass ramps linearly 5KB..15KB.
    const auto cdf = FlowSizeCdf::from_points({{5'000, 0.0001}, {15'000, 1.0}});
    SeededRng rng(7, 2);
    std::vector<std::uint64_t> draws;
    for (int i = 0; i < 100'000; ++i) draws.push_back(cdf.sample(rng));
    std::nth_element(draws.begin(), draws.begin() + draws.size() / 2, draws.end());
    const double median = static_cast<double>(draws[draws.size() / 2]);
    CHECK(median > 10'000 * 0.98);
    CHECK(median < 10'000 * 1.02);
}

TEST_CASE("empirical mean over a million draws matches the trapezoid oracle") {
    const auto cdf = FlowSizeCdf::from_points(
        {{1'000, 0.1}, {10'000, 0.5}, {100'000, 0.9}, {1'000'000, 1.0}});
    // Trapezoid integration oracle over the inverse transform.
    const double analytic = 0.1 * 1'000 + 0.4 * (1'000 + 10'000) / 2.0 +
                            0.4 * (10'000 + 100'000) / 2.0 +
                            0.1 * (100'000 + 1'000'000) / 2.0;
    CHECK(cdf.mean_bytes() == doctest::Approx(analytic));

    SeededRng rng(3, 9);
    double sum = 0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(cdf.sample(rng));
    const double empirical = sum / n;
    CHECK(empirical > analytic * 0.99);
    CHECK(empirical < analytic * 1.01);
}

TEST_CASE("malformed cdfs are rejected") {
    CHECK_THROWS_AS(FlowSizeCdf::from_points({}), ConfigError);
    CHECK_THROWS_AS(FlowSizeCdf::from_points({{100, 0.5}}), ConfigError); // not 1.0
    CHECK_THROWS_AS(FlowSizeCdf::from_points({{100, 0.5}, {50, 1.0}}), ConfigError);
    CHECK_THROWS_AS(FlowSizeCdf::from_points({{100, 0.5}, {200, 0.4}}), ConfigError);
}

TEST_CASE("cdf file parsing skips comments and blank lines") {
    const char* path = "test_cdf_tmp.txt";
    {
        std::ofstream out(path);
        out << "# comment\n\n1000 0.5 # trailing\n2000 1.0\n";
    }
    const auto cdf = FlowSizeCdf::from_file(path);
    CHECK(cdf.points().size() == 2);
    CHECK(cdf.points()[1].size_bytes == 2000);
    std::remove(path);
    CHECK_THROWS_AS(FlowSizeCdf::from_file("does_not_exist.cdf"), ConfigError);
}

TEST_CASE("arrival rate follows load * hosts * capacity / mean_size") {
    // 128 hosts at 100 Gbps, 1MB mean, load 0.5 -> 800k flows/s.
    const auto topo = two_racks(64, 100);
    TrafficSpec spec;
    spec.load_fraction = 0.5;
    spec.fixed_size_bytes = 1'000'000;
    spec.pairing = PairingMode::Random;
    spec.seed = 5;
    const SimTime horizon = msec(100);
    const auto arrivals = poisson_arrivals(spec, topo, horizon);
    // Expect 80,000 arrivals in 100ms within 3%.
    CHECK(arrivals.size() > 77'600);
    CHECK(arrivals.size() < 82'400);
    for (const auto& a : arrivals) CHECK(a.src_host != a.dst_host);
}

TEST_CASE("offered load converges to the requested fraction") {
    const auto topo = two_racks(4, 10);
    TrafficSpec spec;
    spec.load_fraction = 0.6;
    spec.fixed_size_bytes = 100'000;
    spec.pairing = PairingMode::Permutation;
    spec.seed = 11;
    const SimTime horizon = sec(2);
    const auto arrivals = poisson_arrivals(spec, topo, horizon);
    double bytes = 0;
    for (const auto& a : arrivals) bytes += static_cast<double>(a.size_bytes);
    const double offered_bps = bytes * 8e9 / static_cast<double>(horizon);
    const double target = 0.6 * 8 * 10e9;
    CHECK(offered_bps > target * 0.97);
    CHECK(offered_bps < target * 1.03);
}

TEST_CASE("arrival generation is a pure function of spec, topology, horizon") {
    const auto topo = two_racks(4, 10);
    TrafficSpec spec;
    spec.load_fraction = 0.4;
    spec.fixed_size_bytes = 50'000;
    spec.pairing = PairingMode::Random;
    spec.seed = 21;
    const auto a = poisson_arrivals(spec, topo, msec(50));
    const auto b = poisson_arrivals(spec, topo, msec(50));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].time == b[i].time);
        CHECK(a[i].src_host == b[i].src_host);
        CHECK(a[i].dst_host == b[i].dst_host);
        CHECK(a[i].size_bytes == b[i].size_bytes);
    }
}

TEST_CASE("permutation pairing always crosses racks") {
    const auto topo = two_racks(4, 10);
    TrafficSpec spec;
    spec.load_fraction = 0.5;
    spec.fixed_size_bytes = 1'000'000;
    spec.pairing = PairingMode::Permutation;
    spec.seed = 2;
    for (const auto& a : poisson_arrivals(spec, topo, msec(20)))
        CHECK(topo.tor_of_host(a.src_host) != topo.tor_of_host(a.dst_host));
}

TEST_CASE("invalid load is a configuration error") {
    const auto topo = two_racks(2, 10);
    TrafficSpec spec;
    spec.load_fraction = 0.0;
    spec.fixed_size_bytes = 1000;
    CHECK_THROWS_AS(poisson_arrivals(spec, topo, msec(1)), ConfigError);
    spec.load_fraction = 1.5;
    CHECK_THROWS_AS(poisson_arrivals(spec, topo, msec(1)), ConfigError);
}

TEST_CASE("flowlet census splits a trace at gaps exceeding the threshold") {
    std::vector<TracePacket> trace;
    SimTime t = 0;
    for (int i = 0; i < 100; ++i) {
        trace.push_back({t, 1000});
        t += usec(1);
    }
    // One 200us silence, then more packets.
    t += usec(200);
    for (int i = 0; i < 50; ++i) {
        trace.push_back({t, 1000});
        t += usec(1);
    }

    CHECK(flowlet_census(trace, usec(10)).size() == 1 + 1);
    const auto two = flowlet_census(trace, usec(100));
    REQUIRE(two.size() == 2);
    CHECK(two[0] == 100'000);
    CHECK(two[1] == 50'000);
    CHECK(flowlet_census(trace, usec(300)).size() == 1); // threshold >= any gap
    CHECK(flowlet_census(trace, 0).size() == trace.size()); // per-packet flowlets
}
