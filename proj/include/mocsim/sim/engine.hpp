#pragma once

#include <mocsim/sim/event.hpp>

#include <array>
#include <functional>
#include <queue>
#include <vector>

namespace mocsim::sim {

struct RunStats {
    std::uint64_t events_fired = 0;
    SimTime final_clock = 0;
};

/// Single-threaded discrete-event kernel.
///
/// Events fire in strict (fire_at, seq) order. Handlers may schedule further
/// events (never in the past) and emit audit records; both share one sequence
/// counter, so every trace record has a unique seq. Observers see each fired
/// event before its handler runs, then any records the handler emits.
class Engine {
public:
    using Handler = std::function<void(const Event&)>;
    using Observer = std::function<void(const Event&)>;

    /// Enqueue an event; the returned id is its seq.
    EventId schedule(EventKind kind, Payload payload, SimTime fire_at);

    /// Record something that happened at the current clock without queueing it.
    const Event& emit(EventKind kind, Payload payload);

    void on(EventKind kind, Handler handler);
    void add_observer(Observer observer);

    /// Fire every event with fire_at <= t_end. The clock ends at t_end, or at
    /// the last fire time when t_end is kNever (drain mode).
    RunStats run_until(SimTime t_end);

    [[nodiscard]] SimTime now() const noexcept { return clock_; }
    [[nodiscard]] std::size_t pending() const noexcept { return queue_.size(); }
    [[nodiscard]] std::uint64_t events_scheduled() const noexcept { return scheduled_; }
    [[nodiscard]] std::uint64_t events_fired() const noexcept { return fired_; }
    [[nodiscard]] std::uint64_t records_emitted() const noexcept { return emitted_; }

    /// Earliest pending fire time, or kNever.
    [[nodiscard]] SimTime next_fire_time() const noexcept;

private:
    void notify(const Event& e);

    SimTime clock_ = 0;
    EventId next_seq_ = 0;
    std::uint64_t scheduled_ = 0;
    std::uint64_t fired_ = 0;
    std::uint64_t emitted_ = 0;
    std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
    std::array<Handler, kEventKindCount> handlers_{};
    std::vector<Observer> observers_;
    Event last_emitted_;
};

} // namespace mocsim::sim
