#include <doctest.h>

#include <set>

#include "lbsim/topology.hpp"

using namespace lbsim;

namespace {
const LinkSpec kHost{40ull * 1000 * 1000 * 1000, 1000, 2'000'000};
const LinkSpec kFabric{40ull * 1000 * 1000 * 1000, 1000, 2'000'000};

// Brute-force oracle: DFS over all loop-free up-then-down walks, keep the
// shortest length class.
void dfs_all(const Topology& t, std::uint32_t cur, std::uint32_t dst, bool down,
             std::vector<std::uint32_t>& stack,
             std::vector<std::vector<std::uint32_t>>& out) {
    if (cur == dst && stack.size() > 1) {
        out.push_back(stack);
        return;
    }
    if (stack.size() > 5) return;
    auto tier = [&](std::uint32_t n) {
        switch (t.nodes[n].role) {
            case NodeRole::Host: return 0;
            case NodeRole::Tor: return 1;
            case NodeRole::Agg: return 2;
            case NodeRole::Spine: return 2;
            case NodeRole::Core: return 3;
        }
        return 0;
    };
    for (const auto& p : t.nodes[cur].ports) {
        const auto peer = p.peer_node;
        if (!t.nodes[peer].active || t.nodes[peer].role == NodeRole::Host) continue;
        const bool going_up = tier(peer) > tier(cur);
        if (down && going_up) continue;
        if (std::find(stack.begin(), stack.end(), peer) != stack.end()) continue;
        stack.push_back(peer);
        dfs_all(t, peer, dst, down || !going_up, stack, out);
        stack.pop_back();
    }
}

std::size_t oracle_min_path_count(const Topology& t, std::uint32_t src, std::uint32_t dst) {
    std::vector<std::vector<std::uint32_t>> all;
    std::vector<std::uint32_t> stack{src};
    dfs_all(t, src, dst, false, stack, all);
    if (all.empty()) return 0;
    std::size_t shortest = all[0].size();
    for (const auto& p : all) shortest = std::min(shortest, p.size());
    std::size_t count = 0;
    for (const auto& p : all)
        if (p.size() == shortest) ++count;
    return count;
}
} // namespace

TEST_CASE("testbed-shaped leaf-spine: 2 leaves, 4 spines, 3 hosts each") {
    const auto t = build_leaf_spine(2, 4, 3, kHost, kFabric);
    CHECK(t.hosts.size() == 6);
    CHECK(t.tors.size() == 2);
    CHECK(t.nodes[t.tors[0]].up_ports.size() == 4);
    CHECK(t.nodes[t.tors[0]].down_ports.size() == 3);
    const auto paths = t.enumerate_paths(t.tors[0], t.tors[1]);
    CHECK(paths.size() == 4); // one per spine
}

TEST_CASE("two-host dumbbell degenerate minimum") {
    const auto t = build_leaf_spine(1, 1, 2, kHost, kFabric);
    CHECK(t.hosts.size() == 2);
    CHECK(t.enumerate_paths(t.tors[0], t.tors[0]).empty()); // intra-rack
}

TEST_CASE("simulation-scale leaf-spine: 8x12x16") {
    const auto t = build_leaf_spine(8, 12, 16, kHost, kFabric);
    CHECK(t.hosts.size() == 128);
    for (auto tor : t.tors) CHECK(t.nodes[tor].up_ports.size() == 12);
}

TEST_CASE("paper-scale fat tree: 16 cores, 20 aggs, 20 tors, 16 hosts each") {
    const auto t = build_fat_tree(16, 20, 20, 16, 5, kHost, kFabric, kFabric);
    CHECK(t.hosts.size() == 320);
    CHECK(t.tors.size() == 20);
    for (auto tor : t.tors) CHECK(t.nodes[tor].up_ports.size() == 4);
}

TEST_CASE("minimal fat tree matches the DFS oracle") {
    const auto t = build_fat_tree(1, 2, 2, 1, 1, kHost, kFabric, kFabric);
    const auto paths = t.enumerate_paths(t.tors[0], t.tors[1]);
    CHECK(paths.size() == 2);
    CHECK(paths.size() == oracle_min_path_count(t, t.tors[0], t.tors[1]));
}

TEST_CASE("larger fat tree path enumeration matches the DFS oracle") {
    const auto t = build_fat_tree(4, 4, 4, 2, 2, kHost, kFabric, kFabric);
    // Same pod and cross pod.
    for (auto dst : {t.tors[1], t.tors[2]}) {
        const auto paths = t.enumerate_paths(t.tors[0], dst);
        CHECK(paths.size() == oracle_min_path_count(t, t.tors[0], dst));
        CHECK(!paths.empty());
    }
}

TEST_CASE("zero hosts per tor is a configuration error") {
    CHECK_THROWS_AS(build_fat_tree(1, 2, 2, 0, 1, kHost, kFabric, kFabric), ConfigError);
    CHECK_THROWS_AS(build_leaf_spine(2, 4, 0, kHost, kFabric), ConfigError);
}

TEST_CASE("path tags are unique per pair, never zero, and deterministic") {
    const auto t = build_leaf_spine(3, 5, 2, kHost, kFabric);
    const auto a = t.enumerate_paths(t.tors[0], t.tors[2]);
    const auto b = t.enumerate_paths(t.tors[0], t.tors[2]);
    std::set<PathTag> tags;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].tag != 0);
        CHECK(a[i].tag == b[i].tag);
        CHECK(a[i].nodes == b[i].nodes);
        tags.insert(a[i].tag);
    }
    CHECK(tags.size() == a.size());
}

TEST_CASE("tag space exhaustion is a configuration error") {
    const auto t = build_leaf_spine(2, 1024, 1, kHost, kFabric);
    CHECK_THROWS_AS(t.enumerate_paths(t.tors[0], t.tors[1]), ConfigError);
}

TEST_CASE("asymmetry: remove one of four spines, boost one uplink") {
    const auto base = build_leaf_spine(2, 4, 3, kHost, kFabric);
    const auto spine0 = base.tors.size(); // spines follow tors in id order
    const auto t = apply_asymmetry(base, static_cast<std::int32_t>(spine0 + 3),
                                   static_cast<std::int32_t>(spine0 + 2), 2.0);
    const auto paths = t.enumerate_paths(t.tors[0], t.tors[1]);
    CHECK(paths.size() == 3); // 4 spines - 1
    // Each ToR now has one 80G uplink and two 40G uplinks.
    int boosted = 0;
    for (auto p : t.nodes[t.tors[0]].up_ports)
        if (t.nodes[t.tors[0]].ports[p].link.capacity_bps == 80ull * 1000 * 1000 * 1000)
            ++boosted;
    CHECK(boosted == 1);
    CHECK(t.nodes[t.tors[0]].up_ports.size() == 3);
}

TEST_CASE("asymmetry identity: factor 1 and no removal changes nothing") {
    const auto base = build_leaf_spine(2, 4, 3, kHost, kFabric);
    const auto t = apply_asymmetry(base, -1, -1, 1.0);
    CHECK(t.enumerate_paths(t.tors[0], t.tors[1]).size() == 4);
    for (std::size_t n = 0; n < t.nodes.size(); ++n)
        CHECK(t.nodes[n].ports.size() == base.nodes[n].ports.size());
}

TEST_CASE("removing the only spine is a configuration error") {
    const auto base = build_leaf_spine(2, 1, 1, kHost, kFabric);
    CHECK_THROWS_AS(apply_asymmetry(base, static_cast<std::int32_t>(base.tors.size()),
                                    -1, 1.0),
                    ConfigError);
}

TEST_CASE("leaf-spine path count equals spine count") {
    for (std::uint32_t spines : {1u, 2u, 5u, 9u}) {
        const auto t = build_leaf_spine(2, spines, 1, kHost, kFabric);
        CHECK(t.enumerate_paths(t.tors[0], t.tors[1]).size() == spines);
    }
}

TEST_CASE("path enumeration rejects non-ToR endpoints") {
    const auto t = build_leaf_spine(2, 2, 1, kHost, kFabric);
    CHECK_THROWS_AS(t.enumerate_paths(t.hosts[0], t.tors[1]), ConfigError);
}
