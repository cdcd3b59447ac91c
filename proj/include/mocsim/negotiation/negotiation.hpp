#pragma once

#include <mocsim/core/types.hpp>
#include <mocsim/sim/engine.hpp>

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace mocsim::negotiation {

enum class Role : std::uint8_t { Buyer, Seller };

[[nodiscard]] std::string_view to_string(Role r) noexcept;

/// Fraction of the opening-to-reservation gap conceded at round r of M:
/// (r / M)^exponent, 1 from round M on.
struct ConcessionSchedule {
    std::int32_t exponent = 1;

    [[nodiscard]] Rational at(std::int64_t round, std::int64_t max_rounds) const;

    friend bool operator==(const ConcessionSchedule&, const ConcessionSchedule&) = default;
};

struct NegotiationTerms {
    ParticipantId party;
    Role role = Role::Buyer;
    Money reservation_price; ///< buyer maximum or seller minimum
    Money opening_price;
    ConcessionSchedule concession;
    std::int64_t max_rounds = 0;
    Interval desired_window;
    std::int64_t capacity = 0; ///< compute-units wanted (buyer) or offered (seller)

    /// Price this party offers at `round` when the session ends at `max_rounds`.
    [[nodiscard]] Money price_at(std::int64_t round, std::int64_t session_rounds) const;

    friend bool operator==(const NegotiationTerms&, const NegotiationTerms&) = default;
};

/// Throws InvalidTerms.
void validate(const NegotiationTerms& terms, Role expected);

struct Offer {
    std::int64_t round = 0;
    ParticipantId proposer;
    Role proposer_role = Role::Buyer;
    Money price;
    Interval window;
    std::int64_t capacity = 0;

    friend bool operator==(const Offer&, const Offer&) = default;
};

/// min(rate * lateness, cap) for positive lateness, else 0.
struct PenaltySchedule {
    Money rate;
    Money cap;

    [[nodiscard]] Money penalty(SimTime lateness) const;
    /// Penalty for a promise that is never met.
    [[nodiscard]] Money never_met() const { return cap; }

    friend bool operator==(const PenaltySchedule&, const PenaltySchedule&) = default;
};

struct Sla {
    SlaId id;
    ParticipantId buyer;
    ParticipantId seller;
    Money price;
    std::int64_t capacity = 0;
    Interval window;
    SimTime promised_completion = 0;
    PenaltySchedule penalty;

    friend bool operator==(const Sla&, const Sla&) = default;
};

enum class BreakReason : std::uint8_t { NoZoneOfAgreement, RoundLimit, ConstraintMismatch };

[[nodiscard]] std::string_view to_string(BreakReason r) noexcept;

struct Continue {
    Offer last_offer;
};
struct Agreed {
    Sla sla;
};
struct BrokeOff {
    BreakReason reason;
};

using Outcome = std::variant<Continue, Agreed, BrokeOff>;

[[nodiscard]] inline bool is_terminal(const Outcome& o) noexcept { return o.index() != 0; }

struct SessionOptions {
    SlaId sla_id;
    Money penalty_rate;
    std::int64_t session_id = 0;
    sim::Engine* trace = nullptr; ///< receives NegotiationOffer / NegotiationOutcome records
};

class Session {
public:
    /// Throws InvalidTerms.
    Session(NegotiationTerms buyer, NegotiationTerms seller, Role first_mover, SessionOptions options = {});

    /// The due party proposes; the other accepts or the session moves on.
    Outcome step();
    Outcome run_to_completion();

    [[nodiscard]] bool terminated() const noexcept { return terminal_.has_value(); }
    [[nodiscard]] std::int64_t round() const noexcept { return round_; }
    /// min of both parties' max_rounds.
    [[nodiscard]] std::int64_t max_rounds() const noexcept { return max_rounds_; }
    [[nodiscard]] const std::vector<Offer>& transcript() const noexcept { return transcript_; }
    [[nodiscard]] const NegotiationTerms& buyer() const noexcept { return buyer_; }
    [[nodiscard]] const NegotiationTerms& seller() const noexcept { return seller_; }
    [[nodiscard]] Role first_mover() const noexcept { return first_mover_; }

private:
    Outcome finish(Outcome o);

    NegotiationTerms buyer_;
    NegotiationTerms seller_;
    Role first_mover_;
    SessionOptions options_;
    std::int64_t max_rounds_;
    std::int64_t round_ = 0;
    std::vector<Offer> transcript_;
    std::optional<Outcome> terminal_;
};

[[nodiscard]] Session open_session(NegotiationTerms buyer, NegotiationTerms seller, Role first_mover,
                                   SessionOptions options = {});

struct KeepOld {
    BreakReason reason;
};

using RenegotiationOutcome = std::variant<Sla, KeepOld>;

/// Fresh session on updated terms. The new SLA keeps the old penalty rate and
/// promise (clamped into the new window); on break-off the old SLA stands.
/// Throws AlreadyDispatched when the underlying job has started.
[[nodiscard]] RenegotiationOutcome renegotiate(const Sla& current, bool dispatched, NegotiationTerms buyer,
                                               NegotiationTerms seller, Role first_mover, SessionOptions options);

} // namespace mocsim::negotiation
