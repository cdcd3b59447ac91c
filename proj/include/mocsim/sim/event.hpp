#pragma once

#include <mocsim/core/types.hpp>

#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string_view>

namespace mocsim::sim {

using EventId = std::uint64_t;

/// Every record kind that can appear in a run trace.
///
/// The first group is scheduled through the queue and fired by the loop; the
/// second group is emitted immediately by handlers as audit records. Payload
/// layouts (f0..f5) are listed next to each kind.
enum class EventKind : std::uint8_t {
    // scheduled
    RequestArrival,     // request
    VmProvision,        // job, provider
    ExecutionComplete,  // job, vm, provider
    AuctionRound,       // round
    SlaBreach,          // sla
    Timer,              // free-form, used by tests and tools

    // emitted
    RequestSubmitted,   // request, consumer, volume, deadline, budget, cpu_need
    RequestAccepted,    // request, seller, price, promised, volume, sla
    RequestRejected,    // request, reason
    RequestCompleted,   // request, completion, promised
    RequestFailed,      // request, promised
    JobAdmitted,        // job, provider, quoted, promised, volume, request
    JobRejected,        // job, provider, reason
    SlaFormed,          // sla, buyer, seller, price, promised, penalty_rate
    SlaSettled,         // sla, payment, penalty, completion (-1 = never), promised
    ReservationGranted, // reservation, provider, holder, begin, end, capacity
    VmProvisioned,      // vm, provider, machine, cpu, mem, running_at
    VmReleased,         // vm, provider, machine, cpu, mem
    ExecutionStarted,   // job, vm, provider, start, completion
    UsageMetered,       // job, vm, begin, end, cu_ticks, provider
    InvoiceFinalized,   // job, buyer, total, quoted, status (0 completed, 1 failed), volume
    Transfer,           // from, to, amount, reason, sla (-1 none), journal index
    NegotiationOffer,   // session, round, proposer, price
    NegotiationOutcome, // session, outcome (0 agreed, 1 broke off), price or reason, proposals
    OrderSubmitted,     // order, side (0 bid, 1 ask), participant, unit_price, quantity, expiry
    OrderExpired,       // order
    AuctionMatch,       // bid, ask, quantity, clearing_price
    AuctionCleared,     // round, matches, traded_quantity, clearing_price (-1 none)
};

inline constexpr std::size_t kEventKindCount = static_cast<std::size_t>(EventKind::AuctionCleared) + 1;

[[nodiscard]] std::string_view to_string(EventKind kind) noexcept;
[[nodiscard]] std::optional<EventKind> event_kind_from_string(std::string_view name) noexcept;

/// Flat kind-specific record. Unused slots stay zero.
struct Payload {
    std::array<std::int64_t, 6> f{};

    Payload() = default;
    Payload(std::initializer_list<std::int64_t> values) {
        std::size_t i = 0;
        for (auto v : values) {
            if (i < f.size()) {
                f[i++] = v;
            }
        }
    }

    [[nodiscard]] std::int64_t operator[](std::size_t i) const { return f[i]; }

    [[nodiscard]] std::uint64_t digest() const noexcept;

    friend bool operator==(const Payload&, const Payload&) = default;
};

struct Event {
    SimTime fire_at = 0;
    EventId seq = 0;
    EventKind kind = EventKind::Timer;
    Payload payload;

    friend bool operator==(const Event&, const Event&) = default;
};

/// Strict (fire_at, seq) order; the queue pops the smallest.
struct EventOrder {
    bool operator()(const Event& a, const Event& b) const noexcept {
        return a.fire_at != b.fire_at ? a.fire_at > b.fire_at : a.seq > b.seq;
    }
};

} // namespace mocsim::sim
