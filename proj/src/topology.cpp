#include "lbsim/topology.hpp"

#include <algorithm>

namespace lbsim {

const char* node_role_name(NodeRole r) {
    switch (r) {
        case NodeRole::Host: return "host";
        case NodeRole::Tor: return "tor";
        case NodeRole::Agg: return "agg";
        case NodeRole::Spine: return "spine";
        case NodeRole::Core: return "core";
    }
    return "?";
}

std::uint32_t Topology::tor_of_host(std::uint32_t host_node) const {
    for (std::size_t i = 0; i < hosts.size(); ++i)
        if (hosts[i] == host_node) return host_tor[i];
    throw ConfigError("tor_of_host: not a host node");
}

int Topology::port_between(std::uint32_t from, std::uint32_t to) const {
    return port_matrix_[static_cast<std::size_t>(from) * nodes.size() + to];
}

void Topology::add_bidir_link(std::uint32_t a, std::uint32_t b, const LinkSpec& link) {
    if (link.capacity_bps == 0) throw ConfigError("link capacity must be > 0");
    auto pa = static_cast<std::uint32_t>(nodes[a].ports.size());
    auto pb = static_cast<std::uint32_t>(nodes[b].ports.size());
    nodes[a].ports.push_back(Port{b, pb, link});
    nodes[b].ports.push_back(Port{a, pa, link});
}

int Topology::tier(std::uint32_t n) const {
    switch (nodes[n].role) {
        case NodeRole::Host: return 0;
        case NodeRole::Tor: return 1;
        case NodeRole::Agg: return 2;
        case NodeRole::Spine: return 2; // leaf-spine apex
        case NodeRole::Core: return 3;
    }
    return 0;
}

void Topology::finalize() {
    const std::size_t n = nodes.size();
    pod_of.resize(n, -1);
    port_matrix_.assign(n * n, -1);
    for (std::uint32_t id = 0; id < n; ++id) {
        auto& node = nodes[id];
        node.up_ports.clear();
        node.down_ports.clear();
        for (std::uint16_t p = 0; p < node.ports.size(); ++p) {
            const auto peer = node.ports[p].peer_node;
            port_matrix_[static_cast<std::size_t>(id) * n + peer] = static_cast<std::int16_t>(p);
            if (tier(peer) > tier(id))
                node.up_ports.push_back(p);
            else
                node.down_ports.push_back(p);
        }
    }
    path_cache_.clear();
}

void Topology::dfs_paths(std::uint32_t cur, std::uint32_t dst, bool descending, int budget,
                         std::vector<std::uint32_t>& stack, std::vector<Path>& out) const {
    if (cur == dst && stack.size() > 1) {
        Path p;
        p.nodes = stack;
        out.push_back(std::move(p));
        return;
    }
    if (budget == 0) return;
    const auto& node = nodes[cur];
    // Neighbor order follows port order, which follows construction order,
    // so enumeration is deterministic for a given topology.
    if (!descending) {
        for (auto p : node.up_ports) {
            const auto peer = node.ports[p].peer_node;
            if (!nodes[peer].active) continue;
            stack.push_back(peer);
            dfs_paths(peer, dst, false, budget - 1, stack, out);
            stack.pop_back();
        }
    }
    for (auto p : node.down_ports) {
        const auto peer = node.ports[p].peer_node;
        if (!nodes[peer].active || nodes[peer].role == NodeRole::Host) continue;
        stack.push_back(peer);
        dfs_paths(peer, dst, true, budget - 1, stack, out);
        stack.pop_back();
    }
}

std::vector<Path> Topology::enumerate_paths(std::uint32_t src_tor, std::uint32_t dst_tor) const {
    if (nodes[src_tor].role != NodeRole::Tor || nodes[dst_tor].role != NodeRole::Tor)
        throw ConfigError("enumerate_paths: endpoints must be ToRs");
    if (src_tor == dst_tor) return {}; // intra-rack traffic never enters the fabric

    std::vector<Path> all;
    std::vector<std::uint32_t> stack{src_tor};
    // Up-down walks are at most 4 fabric hops (tor-agg-core-agg-tor).
    dfs_paths(src_tor, dst_tor, false, 4, stack, all);
    if (all.empty()) throw ConfigError("no fabric path between ToRs");

    std::size_t shortest = all[0].nodes.size();
    for (const auto& p : all) shortest = std::min(shortest, p.nodes.size());
    std::vector<Path> minimal;
    for (auto& p : all)
        if (p.nodes.size() == shortest) minimal.push_back(std::move(p));

    std::sort(minimal.begin(), minimal.end(),
              [](const Path& x, const Path& y) { return x.nodes < y.nodes; });
    if (minimal.size() > kMaxPathTag)
        throw ConfigError("path tag space exhausted: " + std::to_string(minimal.size()) +
                          " paths for one ToR pair (max 1023)");
    for (std::size_t i = 0; i < minimal.size(); ++i)
        minimal[i].tag = static_cast<PathTag>(i + 1); // 0 stays reserved
    return minimal;
}

const std::vector<Path>& Topology::paths_between(std::uint32_t src_tor, std::uint32_t dst_tor) {
    const std::uint64_t key = (static_cast<std::uint64_t>(src_tor) << 32) | dst_tor;
    auto it = path_cache_.find(key);
    if (it == path_cache_.end())
        it = path_cache_.emplace(key, enumerate_paths(src_tor, dst_tor)).first;
    return it->second;
}

Topology build_leaf_spine(std::uint32_t num_leaves, std::uint32_t num_spines,
                          std::uint32_t hosts_per_leaf, const LinkSpec& host_link,
                          const LinkSpec& fabric_link) {
    if (num_leaves < 1 || num_spines < 1 || hosts_per_leaf < 1)
        throw ConfigError("leaf-spine counts must all be >= 1");
    Topology t;
    for (std::uint32_t i = 0; i < num_leaves; ++i) {
        t.nodes.push_back(Node{NodeRole::Tor, true, {}, {}, {}});
        t.tors.push_back(static_cast<std::uint32_t>(t.nodes.size() - 1));
    }
    std::vector<std::uint32_t> spines;
    for (std::uint32_t i = 0; i < num_spines; ++i) {
        t.nodes.push_back(Node{NodeRole::Spine, true, {}, {}, {}});
        spines.push_back(static_cast<std::uint32_t>(t.nodes.size() - 1));
    }
    for (auto leaf : t.tors)
        for (auto spine : spines) t.add_bidir_link(leaf, spine, fabric_link);
    for (auto leaf : t.tors)
        for (std::uint32_t h = 0; h < hosts_per_leaf; ++h) {
            t.nodes.push_back(Node{NodeRole::Host, true, {}, {}, {}});
            const auto id = static_cast<std::uint32_t>(t.nodes.size() - 1);
            t.hosts.push_back(id);
            t.host_tor.push_back(leaf);
            t.add_bidir_link(id, leaf, host_link);
        }
    t.finalize();
    return t;
}

Topology build_fat_tree(std::uint32_t cores, std::uint32_t aggs, std::uint32_t tors,
                        std::uint32_t hosts_per_tor, std::uint32_t pods,
                        const LinkSpec& host_link, const LinkSpec& tor_agg_link,
                        const LinkSpec& agg_core_link) {
    if (cores < 1 || aggs < 1 || tors < 1 || pods < 1)
        throw ConfigError("fat-tree tier counts must all be >= 1");
    if (hosts_per_tor < 1) throw ConfigError("hosts_per_tor must be >= 1");
    if (aggs % pods != 0 || tors % pods != 0)
        throw ConfigError("aggs and tors must divide evenly among pods");
    const std::uint32_t aggs_per_pod = aggs / pods;
    const std::uint32_t tors_per_pod = tors / pods;

    Topology t;
    std::vector<std::uint32_t> core_ids, agg_ids, tor_ids;
    for (std::uint32_t i = 0; i < cores; ++i) {
        t.nodes.push_back(Node{NodeRole::Core, true, {}, {}, {}});
        core_ids.push_back(static_cast<std::uint32_t>(t.nodes.size() - 1));
        t.pod_of.push_back(-1);
    }
    for (std::uint32_t i = 0; i < aggs; ++i) {
        t.nodes.push_back(Node{NodeRole::Agg, true, {}, {}, {}});
        agg_ids.push_back(static_cast<std::uint32_t>(t.nodes.size() - 1));
        t.pod_of.push_back(static_cast<std::int16_t>(i / aggs_per_pod));
    }
    for (std::uint32_t i = 0; i < tors; ++i) {
        t.nodes.push_back(Node{NodeRole::Tor, true, {}, {}, {}});
        tor_ids.push_back(static_cast<std::uint32_t>(t.nodes.size() - 1));
        t.tors.push_back(tor_ids.back());
        t.pod_of.push_back(static_cast<std::int16_t>(i / tors_per_pod));
    }

    for (std::uint32_t pod = 0; pod < pods; ++pod)
        for (std::uint32_t a = 0; a < aggs_per_pod; ++a)
            for (std::uint32_t r = 0; r < tors_per_pod; ++r)
                t.add_bidir_link(tor_ids[pod * tors_per_pod + r],
                                 agg_ids[pod * aggs_per_pod + a], tor_agg_link);

    // Each core attaches to exactly one agg per pod.
    for (std::uint32_t c = 0; c < cores; ++c) {
        const std::uint32_t in_pod_index = c % aggs_per_pod;
        for (std::uint32_t pod = 0; pod < pods; ++pod)
            t.add_bidir_link(agg_ids[pod * aggs_per_pod + in_pod_index], core_ids[c],
                             agg_core_link);
    }

    for (auto tor : tor_ids)
        for (std::uint32_t h = 0; h < hosts_per_tor; ++h) {
            t.nodes.push_back(Node{NodeRole::Host, true, {}, {}, {}});
            const auto id = static_cast<std::uint32_t>(t.nodes.size() - 1);
            t.hosts.push_back(id);
            t.host_tor.push_back(tor);
            t.add_bidir_link(id, tor, host_link);
        }
    t.finalize();
    return t;
}

Topology apply_asymmetry(const Topology& topo, std::int32_t failed_spine,
                         std::int32_t boosted_spine, double factor) {
    if (factor <= 0) throw ConfigError("asymmetry factor must be > 0");
    Topology t = topo;
    if (failed_spine >= 0) {
        const auto id = static_cast<std::uint32_t>(failed_spine);
        if (id >= t.nodes.size() || (t.nodes[id].role != NodeRole::Spine &&
                                     t.nodes[id].role != NodeRole::Core &&
                                     t.nodes[id].role != NodeRole::Agg))
            throw ConfigError("failed_spine is not a fabric switch");
        std::uint32_t remaining = 0;
        for (std::uint32_t n = 0; n < t.nodes.size(); ++n)
            if (n != id && t.nodes[n].role == t.nodes[id].role && t.nodes[n].active) ++remaining;
        if (remaining == 0) throw ConfigError("cannot remove the only spine");
        t.nodes[id].active = false;
        t.nodes[id].ports.clear();
        for (auto& node : t.nodes) {
            std::vector<Port> kept;
            for (auto& p : node.ports)
                if (p.peer_node != id) kept.push_back(p);
            node.ports = std::move(kept);
        }
        // Port indices shifted; re-link peers. Links between a node pair are
        // unique in these fabrics, so matching by peer id is unambiguous.
        for (std::uint32_t a = 0; a < t.nodes.size(); ++a)
            for (std::uint32_t pa = 0; pa < t.nodes[a].ports.size(); ++pa) {
                const auto b = t.nodes[a].ports[pa].peer_node;
                for (std::uint32_t pb = 0; pb < t.nodes[b].ports.size(); ++pb)
                    if (t.nodes[b].ports[pb].peer_node == a) {
                        t.nodes[a].ports[pa].peer_port = pb;
                        break;
                    }
            }
    }
    if (boosted_spine >= 0 && factor != 1.0) {
        const auto id = static_cast<std::uint32_t>(boosted_spine);
        if (id >= t.nodes.size() || !t.nodes[id].active)
            throw ConfigError("boosted_spine is not an active switch");
        for (auto& node : t.nodes)
            for (auto& p : node.ports)
                if (p.peer_node == id)
                    p.link.capacity_bps =
                        static_cast<std::uint64_t>(static_cast<double>(p.link.capacity_bps) * factor);
        for (auto& p : t.nodes[id].ports)
            p.link.capacity_bps =
                static_cast<std::uint64_t>(static_cast<double>(p.link.capacity_bps) * factor);
    }
    t.finalize();
    return t;
}

} // namespace lbsim
