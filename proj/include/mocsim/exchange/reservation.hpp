#pragma once

#include <mocsim/core/step_profile.hpp>
#include <mocsim/core/types.hpp>

#include <map>
#include <vector>

namespace mocsim::exchange {

struct Reservation {
    ReservationId id;
    ParticipantId provider;
    ParticipantId holder;
    Interval window;
    std::int64_t capacity = 0; ///< compute-units
    SlaId backing_sla;

    friend bool operator==(const Reservation&, const Reservation&) = default;
};

/// Advance reservations per provider. Grants are never revoked.
class ReservationBook {
public:
    void add_provider(ParticipantId provider, std::int64_t capacity);

    /// Throws ReservationConflict when some tick of the window would exceed
    /// capacity, std::invalid_argument for an unknown provider, empty window,
    /// non-positive capacity or missing SLA.
    Reservation reserve(ParticipantId provider, ParticipantId holder, Interval window, std::int64_t capacity,
                        SlaId backing_sla);

    [[nodiscard]] std::int64_t reserved_at(ParticipantId provider, SimTime t) const;
    [[nodiscard]] std::int64_t capacity(ParticipantId provider) const;
    [[nodiscard]] const std::vector<Reservation>& granted() const noexcept { return granted_; }

private:
    struct Calendar {
        std::int64_t capacity = 0;
        StepProfile profile;
    };

    std::map<ParticipantId, Calendar> providers_;
    std::vector<Reservation> granted_;
};

} // namespace mocsim::exchange
