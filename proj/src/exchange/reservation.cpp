#include <mocsim/exchange/reservation.hpp>

#include <mocsim/core/error.hpp>

#include <stdexcept>
#include <string>

namespace mocsim::exchange {

void ReservationBook::add_provider(ParticipantId provider, std::int64_t capacity) {
    if (capacity < 0) {
        throw std::invalid_argument("provider capacity must be >= 0");
    }
    providers_[provider].capacity = capacity;
}

Reservation ReservationBook::reserve(ParticipantId provider, ParticipantId holder, Interval window,
                                     std::int64_t capacity, SlaId backing_sla) {
    auto it = providers_.find(provider);
    if (it == providers_.end()) {
        throw std::invalid_argument("no reservation calendar for provider " + std::to_string(provider.value));
    }
    if (window.empty() || capacity <= 0) {
        throw std::invalid_argument("reservation needs a non-empty window and positive capacity");
    }
    if (!backing_sla.valid()) {
        throw std::invalid_argument("reservation needs a backing SLA");
    }
    auto& cal = it->second;
    const auto peak = cal.profile.max_over(window);
    if (peak + capacity > cal.capacity) {
        throw ReservationConflict("provider " + std::to_string(provider.value) + " has " +
                                  std::to_string(cal.capacity - peak) + " cu free in [" +
                                  std::to_string(window.begin) + "," + std::to_string(window.end) + "), need " +
                                  std::to_string(capacity));
    }
    cal.profile.add(window, capacity);
    Reservation r{ReservationId{static_cast<std::int64_t>(granted_.size())}, provider, holder, window, capacity,
                  backing_sla};
    granted_.push_back(r);
    return r;
}

std::int64_t ReservationBook::reserved_at(ParticipantId provider, SimTime t) const {
    auto it = providers_.find(provider);
    return it == providers_.end() ? 0 : it->second.profile.level_at(t);
}

std::int64_t ReservationBook::capacity(ParticipantId provider) const {
    auto it = providers_.find(provider);
    return it == providers_.end() ? 0 : it->second.capacity;
}

} // namespace mocsim::exchange
