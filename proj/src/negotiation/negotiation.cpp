#include <mocsim/negotiation/negotiation.hpp>

#include <mocsim/core/error.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <utility>
#include <string>

namespace mocsim::negotiation {

std::string_view to_string(Role r) noexcept { return r == Role::Buyer ? "Buyer" : "Seller"; }

std::string_view to_string(BreakReason r) noexcept {
    switch (r) {
    case BreakReason::NoZoneOfAgreement:
        return "NoZoneOfAgreement";
    case BreakReason::RoundLimit:
        return "RoundLimit";
    case BreakReason::ConstraintMismatch:
        return "ConstraintMismatch";
    }
    return "?";
}

namespace {

using Big = boost::multiprecision::cpp_int;

/// Exact (round / max_rounds)^exponent as numerator and denominator.
std::pair<Big, Big> fraction(const ConcessionSchedule& c, std::int64_t round, std::int64_t max_rounds) {
    if (max_rounds <= 0 || round >= max_rounds) {
        return {1, 1};
    }
    if (round <= 0) {
        return {0, 1};
    }
    return {boost::multiprecision::pow(Big{round}, static_cast<unsigned>(c.exponent)),
            boost::multiprecision::pow(Big{max_rounds}, static_cast<unsigned>(c.exponent))};
}

} // namespace

Rational ConcessionSchedule::at(std::int64_t round, std::int64_t max_rounds) const {
    auto [num, den] = fraction(*this, round, max_rounds);
    const Big g = boost::multiprecision::gcd(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    if (den > std::numeric_limits<std::int64_t>::max()) {
        throw std::overflow_error("concession fraction does not fit in 64 bits");
    }
    return Rational{num.convert_to<std::int64_t>(), den.convert_to<std::int64_t>()};
}

Money NegotiationTerms::price_at(std::int64_t round, std::int64_t session_rounds) const {
    const auto [num, den] = fraction(concession, round, session_rounds);
    const std::int64_t gap = role == Role::Buyer ? reservation_price.micros() - opening_price.micros()
                                                 : opening_price.micros() - reservation_price.micros();
    const Big scaled = Big{gap} * num;
    Big moved = scaled / den;
    if (scaled < 0 && moved * den != scaled) {
        moved -= 1;
    }
    const auto step = Money{moved.convert_to<std::int64_t>()};
    return role == Role::Buyer ? opening_price + step : opening_price - step;
}

void validate(const NegotiationTerms& t, Role expected) {
    const std::string who = std::string{to_string(expected)} + " " + std::to_string(t.party.value);
    if (t.role != expected) {
        throw InvalidTerms(who + ": wrong role");
    }
    if (t.reservation_price < Money{0} || t.opening_price < Money{0}) {
        throw InvalidTerms(who + ": prices must be >= 0");
    }
    if (expected == Role::Buyer && t.opening_price > t.reservation_price) {
        throw InvalidTerms(who + ": opening above reservation");
    }
    if (expected == Role::Seller && t.opening_price < t.reservation_price) {
        throw InvalidTerms(who + ": opening below reservation");
    }
    if (t.max_rounds < 0) {
        throw InvalidTerms(who + ": max_rounds must be >= 0");
    }
    if (t.concession.exponent < 1 || t.concession.exponent > 16) {
        throw InvalidTerms(who + ": concession exponent must lie in [1, 16]");
    }
    if (t.capacity < 0 || t.desired_window.end < t.desired_window.begin) {
        throw InvalidTerms(who + ": capacity or window malformed");
    }
}

Money PenaltySchedule::penalty(SimTime lateness) const {
    if (lateness <= 0) {
        return Money{0};
    }
    const Wide raw = Wide{rate.micros()} * lateness;
    return raw >= cap.micros() ? cap : Money{narrow(raw)};
}

Session::Session(NegotiationTerms buyer, NegotiationTerms seller, Role first_mover, SessionOptions options)
    : buyer_(std::move(buyer)),
      seller_(std::move(seller)),
      first_mover_(first_mover),
      options_(options),
      max_rounds_(std::min(buyer_.max_rounds, seller_.max_rounds)) {
    validate(buyer_, Role::Buyer);
    validate(seller_, Role::Seller);
    if (options_.penalty_rate < Money{0}) {
        throw InvalidTerms("penalty rate must be >= 0");
    }
}

Session open_session(NegotiationTerms buyer, NegotiationTerms seller, Role first_mover, SessionOptions options) {
    return Session(std::move(buyer), std::move(seller), first_mover, options);
}

Outcome Session::finish(Outcome o) {
    terminal_ = o;
    if (options_.trace != nullptr) {
        const auto proposals = static_cast<std::int64_t>(transcript_.size());
        if (const auto* a = std::get_if<Agreed>(&o)) {
            options_.trace->emit(sim::EventKind::NegotiationOutcome,
                                 {options_.session_id, 0, a->sla.price.micros(), proposals});
        } else {
            options_.trace->emit(sim::EventKind::NegotiationOutcome,
                                 {options_.session_id, 1, static_cast<std::int64_t>(std::get<BrokeOff>(o).reason),
                                  proposals});
        }
    }
    return o;
}

Outcome Session::step() {
    if (terminal_) {
        throw SessionTerminated("session " + std::to_string(options_.session_id) + " already terminated");
    }
    const Interval window = buyer_.desired_window.intersect(seller_.desired_window);
    if (window.empty() || buyer_.capacity > seller_.capacity) {
        return finish(BrokeOff{BreakReason::ConstraintMismatch});
    }
    if (max_rounds_ == 0) {
        return finish(BrokeOff{BreakReason::RoundLimit});
    }

    const bool buyer_moves = (round_ % 2 == 0) == (first_mover_ == Role::Buyer);
    const auto& proposer = buyer_moves ? buyer_ : seller_;
    const auto& receiver = buyer_moves ? seller_ : buyer_;
    Offer offer{round_, proposer.party, proposer.role, proposer.price_at(round_, max_rounds_), window,
                buyer_.capacity};
    transcript_.push_back(offer);
    if (options_.trace != nullptr) {
        options_.trace->emit(sim::EventKind::NegotiationOffer,
                             {options_.session_id, round_, proposer.party.value, offer.price.micros()});
    }

    const Money own_next = receiver.price_at(round_ + 1, max_rounds_);
    const bool acceptable = buyer_moves ? offer.price >= own_next : offer.price <= own_next;
    if (acceptable) {
        Sla sla;
        sla.id = options_.sla_id;
        sla.buyer = buyer_.party;
        sla.seller = seller_.party;
        sla.price = offer.price;
        sla.capacity = buyer_.capacity;
        sla.window = window;
        sla.promised_completion = window.end;
        sla.penalty = PenaltySchedule{options_.penalty_rate, offer.price};
        return finish(Agreed{sla});
    }
    ++round_;
    if (round_ > max_rounds_) {
        return finish(BrokeOff{BreakReason::NoZoneOfAgreement});
    }
    return Continue{offer};
}

Outcome Session::run_to_completion() {
    if (terminal_) {
        return *terminal_;
    }
    for (;;) {
        auto o = step();
        if (is_terminal(o)) {
            return o;
        }
    }
}

RenegotiationOutcome renegotiate(const Sla& current, bool dispatched, NegotiationTerms buyer,
                                 NegotiationTerms seller, Role first_mover, SessionOptions options) {
    if (dispatched) {
        throw AlreadyDispatched("sla " + std::to_string(current.id.value) + " is already being executed");
    }
    options.penalty_rate = current.penalty.rate;
    auto session = open_session(std::move(buyer), std::move(seller), first_mover, options);
    auto outcome = session.run_to_completion();
    if (const auto* b = std::get_if<BrokeOff>(&outcome)) {
        return KeepOld{b->reason};
    }
    Sla next = std::get<Agreed>(outcome).sla;
    next.promised_completion = std::clamp(current.promised_completion, next.window.begin, next.window.end);
    next.penalty.cap = current.penalty.cap == current.price ? next.price : min(current.penalty.cap, next.price);
    return next;
}

} // namespace mocsim::negotiation
