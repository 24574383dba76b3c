#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lbsim/time_types.hpp"

namespace lbsim {

// Bad experiment setup (inconsistent counts, exhausted tag space, ...).
// The CLI maps it to exit code 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class NodeRole : std::uint8_t { Host, Tor, Agg, Spine, Core };

const char* node_role_name(NodeRole r);

struct LinkSpec {
    std::uint64_t capacity_bps = 0;
    SimTime propagation_delay = 0;
    std::uint64_t queue_capacity_bytes = 0;
};

struct Port {
    std::uint32_t peer_node = 0;
    std::uint32_t peer_port = 0;
    LinkSpec link;
};

struct Node {
    NodeRole role = NodeRole::Host;
    bool active = true;
    std::vector<Port> ports;
    std::vector<std::uint16_t> up_ports;   // ports toward the next tier up
    std::vector<std::uint16_t> down_ports; // ports toward hosts / lower tier
};

// 10-bit path identifier, unique per (src ToR, dst ToR) pair. 0 = untagged.
using PathTag = std::uint16_t;
constexpr PathTag kMaxPathTag = 1023;

struct Path {
    PathTag tag = 0;
    std::vector<std::uint32_t> nodes; // src ToR ... dst ToR inclusive
};

class Topology {
public:
    std::vector<Node> nodes;
    std::vector<std::uint32_t> hosts;
    std::vector<std::uint32_t> tors;
    std::vector<std::uint32_t> host_tor; // indexed by host position in `hosts`
    std::vector<std::int16_t> pod_of;    // per node; -1 outside fat trees

    std::uint32_t tor_of_host(std::uint32_t host_node) const;
    int port_between(std::uint32_t from, std::uint32_t to) const; // -1 if none
    bool is_tor(std::uint32_t n) const { return nodes[n].role == NodeRole::Tor; }

    // All minimal up-down paths between two ToRs, ordered by hop indices,
    // tags assigned 1..count in that order. Same ToR -> empty.
    std::vector<Path> enumerate_paths(std::uint32_t src_tor, std::uint32_t dst_tor) const;

    // Cached per-pair enumeration used by the run-time dataplane.
    const std::vector<Path>& paths_between(std::uint32_t src_tor, std::uint32_t dst_tor);

    void add_bidir_link(std::uint32_t a, std::uint32_t b, const LinkSpec& link);
    void finalize(); // builds port role indices + adjacency matrix

private:
    std::vector<std::int16_t> port_matrix_; // dense from*n+to -> port or -1
    mutable std::map<std::uint64_t, std::vector<Path>> path_cache_;
    int tier(std::uint32_t n) const;
    void dfs_paths(std::uint32_t cur, std::uint32_t dst, bool descending, int budget,
                   std::vector<std::uint32_t>& stack, std::vector<Path>& out) const;
};

Topology build_leaf_spine(std::uint32_t num_leaves, std::uint32_t num_spines,
                          std::uint32_t hosts_per_leaf, const LinkSpec& host_link,
                          const LinkSpec& fabric_link);

// 3-tier fat tree. `pods` splits aggs and tors evenly; every ToR connects to
// all aggs in its pod; core c connects, in every pod, to the agg with in-pod
// index (c mod aggs_per_pod).
Topology build_fat_tree(std::uint32_t cores, std::uint32_t aggs, std::uint32_t tors,
                        std::uint32_t hosts_per_tor, std::uint32_t pods,
                        const LinkSpec& host_link, const LinkSpec& tor_agg_link,
                        const LinkSpec& agg_core_link);

// Testbed-style asymmetry: deactivate one spine and multiply the capacity of
// every remaining ToR link to `boosted_spine` by `factor`. Either step can be
// skipped (failed_spine < 0 / factor == 1).
Topology apply_asymmetry(const Topology& topo, std::int32_t failed_spine,
                         std::int32_t boosted_spine, double factor);

} // namespace lbsim
