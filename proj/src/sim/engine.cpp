#include <mocsim/sim/engine.hpp>

#include <mocsim/core/error.hpp>

#include <string>

namespace mocsim::sim {

EventId Engine::schedule(EventKind kind, Payload payload, SimTime fire_at) {
    if (fire_at < clock_) {
        throw SchedulingInPast("event " + std::string(to_string(kind)) + " at t=" + std::to_string(fire_at) +
                               " but clock is " + std::to_string(clock_));
    }
    const EventId id = next_seq_++;
    queue_.push(Event{fire_at, id, kind, payload});
    ++scheduled_;
    return id;
}

const Event& Engine::emit(EventKind kind, Payload payload) {
    last_emitted_ = Event{clock_, next_seq_++, kind, payload};
    ++emitted_;
    notify(last_emitted_);
    return last_emitted_;
}

void Engine::on(EventKind kind, Handler handler) { handlers_[static_cast<std::size_t>(kind)] = std::move(handler); }

void Engine::add_observer(Observer observer) { observers_.push_back(std::move(observer)); }

SimTime Engine::next_fire_time() const noexcept { return queue_.empty() ? kNever : queue_.top().fire_at; }

void Engine::notify(const Event& e) {
    for (const auto& obs : observers_) {
        obs(e);
    }
}

RunStats Engine::run_until(SimTime t_end) {
    RunStats stats;
    while (!queue_.empty() && queue_.top().fire_at <= t_end) {
        const Event e = queue_.top();
        queue_.pop();
        clock_ = e.fire_at;
        ++fired_;
        ++stats.events_fired;
        notify(e);
        if (const auto& h = handlers_[static_cast<std::size_t>(e.kind)]) {
            h(e);
        }
    }
    if (t_end != kNever && t_end > clock_) {
        clock_ = t_end;
    }
    stats.final_clock = clock_;
    return stats;
}

} // namespace mocsim::sim
