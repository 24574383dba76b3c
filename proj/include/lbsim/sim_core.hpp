#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "lbsim/time_types.hpp"

namespace lbsim {

// Raised on internal contract violations (scheduling in the past, double
// completion, missing path pin, ...). The CLI maps it to exit code 2.
struct SimAbort : std::logic_error {
    explicit SimAbort(const std::string& what) : std::logic_error(what) {}
};

enum class EventKind : std::uint8_t {
    PacketArrival = 0,
    PacketDequeue = 1,
    TimerExpiry = 2,
    FlowArrival = 3,
    MetricSample = 4,
};
constexpr int kEventKindCount = 5;

// Typed timer subkinds keep the hot path allocation-free; Callback covers
// the rare generic cases (scenario hooks, phase switches).
enum class TimerKind : std::uint8_t {
    NicWake = 0,
    DcqcnAlpha = 1,
    DcqcnRateIncrease = 2,
    Callback = 3,
    RetransmitCheck = 4,
};

struct Event {
    SimTime fire_at = 0;
    std::uint64_t seq = 0; // tiebreaker, assigned in scheduling order
    EventKind kind = EventKind::TimerExpiry;
    TimerKind timer = TimerKind::Callback;
    std::uint32_t a = 0; // node id / host id / arrival index
    std::uint32_t b = 0; // port id / qp id
    std::uint32_t c = 0; // packet pool index / callback index
};

struct RunStats {
    std::uint64_t scheduled = 0;
    std::array<std::uint64_t, kEventKindCount> processed{};
    std::uint64_t still_queued = 0;
    SimTime end_time = 0;

    std::uint64_t total_processed() const {
        std::uint64_t t = 0;
        for (auto v : processed) t += v;
        return t;
    }
    bool operator==(const RunStats&) const = default;
};

// Deterministic discrete-event core: events with equal fire_at run in
// scheduling order. A run owns one engine; nothing here is thread-safe.
class EventEngine {
public:
    SimTime now() const { return now_; }

    void schedule(SimTime fire_at, EventKind kind, std::uint32_t a = 0,
                  std::uint32_t b = 0, std::uint32_t c = 0,
                  TimerKind timer = TimerKind::Callback) {
        if (fire_at < now_)
            throw SimAbort("schedule: event in the past (fire_at=" +
                           std::to_string(fire_at) + " now=" + std::to_string(now_) + ")");
        queue_.push(Event{fire_at, next_seq_++, kind, timer, a, b, c});
        ++stats_.scheduled;
    }

    // One-shot callback timer; the slot is recycled after it fires.
    void schedule_callback(SimTime fire_at, std::function<void()> fn) {
        std::uint32_t idx;
        if (!free_callbacks_.empty()) {
            idx = free_callbacks_.back();
            free_callbacks_.pop_back();
            callbacks_[idx] = std::move(fn);
        } else {
            idx = static_cast<std::uint32_t>(callbacks_.size());
            callbacks_.push_back(std::move(fn));
        }
        schedule(fire_at, EventKind::TimerExpiry, 0, 0, idx, TimerKind::Callback);
    }

    void run_callback(std::uint32_t idx) {
        auto fn = std::move(callbacks_[idx]);
        callbacks_[idx] = nullptr;
        free_callbacks_.push_back(idx);
        fn();
    }

    // Drains events with fire_at <= horizon through `handler`; an empty
    // queue terminates early. Callback timers are dispatched internally.
    template <typename Handler>
    RunStats run_until(SimTime horizon, Handler&& handler) {
        while (!queue_.empty() && queue_.top().fire_at <= horizon) {
            Event ev = queue_.top();
            queue_.pop();
            if (ev.fire_at < now_)
                throw SimAbort("event queue produced a non-monotonic clock");
            now_ = ev.fire_at;
            ++stats_.processed[static_cast<int>(ev.kind)];
            if (ev.kind == EventKind::TimerExpiry && ev.timer == TimerKind::Callback)
                run_callback(ev.c);
            else
                handler(ev);
        }
        if (queue_.empty() && now_ < horizon) now_ = now_; // early drain keeps last event time
        stats_.still_queued = queue_.size();
        stats_.end_time = now_;
        return stats_;
    }

    const RunStats& stats() const { return stats_; }
    bool empty() const { return queue_.empty(); }
    std::size_t pending() const { return queue_.size(); }

private:
    struct Later {
        bool operator()(const Event& x, const Event& y) const {
            if (x.fire_at != y.fire_at) return x.fire_at > y.fire_at;
            return x.seq > y.seq;
        }
    };

    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::vector<std::function<void()>> callbacks_;
    std::vector<std::uint32_t> free_callbacks_;
    SimTime now_ = 0;
    std::uint64_t next_seq_ = 0;
    RunStats stats_;
};

} // namespace lbsim
