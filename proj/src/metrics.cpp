#include "lbsim/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace lbsim {

double fct_slowdown(const FlowRecord& rec, std::uint64_t line_rate_bps, SimTime base_rtt) {
    if (rec.end < rec.start) throw SimAbort("flow record ends before it starts");
    const double fct = static_cast<double>(rec.end - rec.start);
    const double ideal = static_cast<double>(tx_time(rec.size_bytes, line_rate_bps)) +
                         static_cast<double>(base_rtt);
    const double slowdown = fct / ideal;
    if (slowdown < 1.0 - 1e-9)
        throw SimAbort("measured slowdown below 1.0 — measurement bug");
    return slowdown;
}

double throughput_imbalance(const ImbalanceSample& sample) {
    if (sample.per_uplink_bytes.empty())
        throw SimAbort("imbalance sample without uplinks");
    std::uint64_t mx = 0, mn = UINT64_MAX, sum = 0;
    for (auto b : sample.per_uplink_bytes) {
        mx = std::max(mx, b);
        mn = std::min(mn, b);
        sum += b;
    }
    if (sum == 0) throw SimAbort("imbalance on an all-zero window");
    const double mean =
        static_cast<double>(sum) / static_cast<double>(sample.per_uplink_bytes.size());
    return (static_cast<double>(mx) - static_cast<double>(mn)) / mean;
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw SimAbort("percentile of an empty list");
    if (p < 0.0 || p > 100.0) throw SimAbort("percentile p out of range");
    std::sort(values.begin(), values.end());
    // Nearest rank: smallest index r with r/n >= p/100.
    auto rank = static_cast<std::size_t>(
        std::ceil(p / 100.0 * static_cast<double>(values.size())));
    if (rank < 1) rank = 1;
    return values[rank - 1];
}

SlowdownSummary summarize_slowdowns(const std::vector<FlowRecord>& flows) {
    SlowdownSummary s;
    if (flows.empty()) return s;
    std::vector<double> v;
    v.reserve(flows.size());
    double sum = 0;
    for (const auto& f : flows) {
        v.push_back(f.slowdown);
        sum += f.slowdown;
    }
    s.count = v.size();
    s.mean = sum / static_cast<double>(v.size());
    s.p50 = percentile(v, 50);
    s.p99 = percentile(v, 99);
    return s;
}

} // namespace lbsim
