#include "lbsim/workload.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace lbsim {

FlowSizeCdf FlowSizeCdf::from_points(std::vector<Point> pts) {
    if (pts.empty()) throw ConfigError("flow size CDF needs at least one point");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].size_bytes < 1) throw ConfigError("CDF sizes must be >= 1 byte");
        if (pts[i].cum_prob <= 0.0 || pts[i].cum_prob > 1.0)
            throw ConfigError("CDF probabilities must lie in (0, 1]");
        if (i > 0 && (pts[i].size_bytes <= pts[i - 1].size_bytes ||
                      pts[i].cum_prob <= pts[i - 1].cum_prob))
            throw ConfigError("CDF points must strictly increase in size and probability");
    }
    if (pts.back().cum_prob != 1.0) throw ConfigError("CDF must end at probability 1.0");
    FlowSizeCdf cdf;
    cdf.points_ = std::move(pts);
    return cdf;
}

FlowSizeCdf FlowSizeCdf::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open CDF file: " + path);
    std::vector<Point> pts;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        double size = 0, prob = 0;
        if (!(ls >> size >> prob)) continue; // blank or comment-only line
        pts.push_back(Point{static_cast<std::uint64_t>(size), prob});
    }
    if (pts.empty()) throw ConfigError("CDF file has no data points: " + path);
    return from_points(std::move(pts));
}

std::uint64_t FlowSizeCdf::sample(SeededRng& rng) const {
    const double u = rng.next_double();
    if (u <= points_.front().cum_prob || points_.size() == 1)
        return points_.front().size_bytes;
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (u <= points_[i].cum_prob) {
            const auto& lo = points_[i - 1];
            const auto& hi = points_[i];
            const double frac = (u - lo.cum_prob) / (hi.cum_prob - lo.cum_prob);
            const double size = static_cast<double>(lo.size_bytes) +
                                frac * static_cast<double>(hi.size_bytes - lo.size_bytes);
            return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(size));
        }
    }
    return points_.back().size_bytes;
}

double FlowSizeCdf::mean_bytes() const {
    double mean = points_.front().cum_prob * static_cast<double>(points_.front().size_bytes);
    for (std::size_t i = 1; i < points_.size(); ++i) {
        const double dp = points_[i].cum_prob - points_[i - 1].cum_prob;
        mean += dp * 0.5 *
                (static_cast<double>(points_[i - 1].size_bytes) +
                 static_cast<double>(points_[i].size_bytes));
    }
    return mean;
}

std::vector<FlowArrival> poisson_arrivals(const TrafficSpec& spec, const Topology& topo,
                                          SimTime horizon) {
    if (spec.load_fraction <= 0.0 || spec.load_fraction > 1.0)
        throw ConfigError("load_fraction must lie in (0, 1]");
    const auto num_hosts = topo.hosts.size();
    if (num_hosts < 2) throw ConfigError("workload needs at least two hosts");

    const std::uint64_t host_bps =
        topo.nodes[topo.hosts[0]].ports[0].link.capacity_bps;
    const double mean_size = spec.fixed_size_bytes > 0
                                 ? static_cast<double>(spec.fixed_size_bytes)
                                 : spec.cdf.mean_bytes();
    const double lambda = spec.load_fraction *
                          static_cast<double>(num_hosts) *
                          (static_cast<double>(host_bps) / 8.0) / mean_size;

    SeededRng rng(spec.seed, rng_stream::kWorkload);
    SeededRng pair_rng(spec.seed, rng_stream::kPairing);
    const std::size_t rack_shift = topo.hosts.size() / topo.tors.size();

    std::vector<FlowArrival> out;
    SimTime t = 0;
    for (;;) {
        t += rng.next_exp_ns(lambda);
        if (t > horizon) break;
        FlowArrival fa;
        fa.time = t;
        fa.size_bytes = spec.fixed_size_bytes > 0 ? spec.fixed_size_bytes
                                                  : spec.cdf.sample(rng);
        switch (spec.pairing) {
            case PairingMode::Random: {
                const auto s = pair_rng.next_below(num_hosts);
                auto d = pair_rng.next_below(num_hosts - 1);
                if (d >= s) ++d;
                fa.src_host = topo.hosts[s];
                fa.dst_host = topo.hosts[d];
                break;
            }
            case PairingMode::Permutation: {
                const auto s = pair_rng.next_below(num_hosts);
                fa.src_host = topo.hosts[s];
                fa.dst_host = topo.hosts[(s + rack_shift) % num_hosts];
                break;
            }
            case PairingMode::Incast: {
                const auto s = 1 + pair_rng.next_below(num_hosts - 1);
                fa.src_host = topo.hosts[s];
                fa.dst_host = topo.hosts[0];
                break;
            }
        }
        out.push_back(fa);
    }
    return out;
}

std::vector<std::uint64_t> flowlet_census(const std::vector<TracePacket>& trace,
                                          SimTime gap_threshold) {
    std::vector<std::uint64_t> sizes;
    std::uint64_t cur = 0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (i > 0 && trace[i].time - trace[i - 1].time > gap_threshold) {
            sizes.push_back(cur);
            cur = 0;
        }
        cur += trace[i].bytes;
    }
    if (cur > 0) sizes.push_back(cur);
    return sizes;
}

} // namespace lbsim
