#pragma once

#include <mocsim/core/types.hpp>
#include <mocsim/exchange/directory.hpp>

#include <map>
#include <optional>
#include <variant>
#include <vector>

namespace mocsim::exchange {

namespace market_price {

struct Fixed {
    Money base;

    friend bool operator==(const Fixed&, const Fixed&) = default;
};

/// base * (1 + a * utilization + b * max(0, demand_index - 1))
struct Variable {
    Money base;
    Rational a{0};
    Rational b{0};

    friend bool operator==(const Variable&, const Variable&) = default;
};

} // namespace market_price

using MarketPricePolicy = std::variant<market_price::Fixed, market_price::Variable>;

/// Throws InvalidPolicy.
void validate(const MarketPricePolicy& policy);

/// Provider's posted price per cu-tick, never below `cost_floor`.
/// Throws InvalidPolicy for utilization outside [0, 1] or negative demand index.
[[nodiscard]] Money provider_set_price(const MarketPricePolicy& policy, Rational utilization, Rational demand_index,
                                       Money cost_floor);

/// Venue id of the provider's own auction participation.
inline constexpr std::int64_t kAuctionVenue = -1;

struct VenueEstimate {
    std::int64_t venue = 0; ///< broker participant id or kAuctionVenue
    Money estimated_utility;
};

/// Positive estimates ranked by utility (ties by venue id), at most `max_venues`.
[[nodiscard]] std::vector<std::int64_t> provider_select_venues(const std::vector<VenueEstimate>& estimates,
                                                               std::int64_t max_venues);

struct BrokerCandidate {
    RequestId request;
    Money willingness; ///< what the consumer is prepared to pay
    std::int64_t volume = 0;
    std::int32_t reliability_class = 0;
};

struct MarketView {
    std::optional<Money> last_clearing_price; ///< per cu-tick
    std::vector<DirectoryListing> providers;
    std::int64_t procurable_capacity = 0; ///< cu-ticks
};

struct RiskModel {
    std::map<std::int32_t, Rational> lateness_probability; ///< by reliability class; missing means 0
    SimTime expected_lateness = 0;
    Money penalty_rate; ///< per tick
};

struct BrokerAction {
    RequestId request;
    Money willingness;
    Money procurement_estimate;
    Money expected_penalty;
    Money estimated_utility;
    std::int64_t volume = 0;
};

struct BrokerDecision {
    std::vector<BrokerAction> engaged; ///< ordered by request id
    Money estimated_utility;
    bool exact = true; ///< false when the greedy fallback chose the subset
};

inline constexpr std::size_t kExactSubsetLimit = 16;

/// Per-cu-tick procurement price: last clearing price, else the lowest provider hint.
[[nodiscard]] std::optional<Money> procurement_unit_price(const MarketView& view);

/// Utility terms for one candidate; empty when no procurement price is known.
[[nodiscard]] std::optional<BrokerAction> evaluate_candidate(const BrokerCandidate& c, const MarketView& view,
                                                             const RiskModel& risk);

/// Subset of candidates with positive utility maximizing the summed estimate
/// within procurable capacity. Exhaustive up to kExactSubsetLimit positive
/// candidates, greedy by utility beyond.
[[nodiscard]] BrokerDecision broker_decide(const std::vector<BrokerCandidate>& candidates, const MarketView& view,
                                           const RiskModel& risk);

} // namespace mocsim::exchange
