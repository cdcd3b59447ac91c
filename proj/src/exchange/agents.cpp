#include <mocsim/exchange/agents.hpp>

#include <mocsim/core/error.hpp>

#include <algorithm>

namespace mocsim::exchange {

void validate(const MarketPricePolicy& policy) {
    std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if (p.base < Money{0}) {
                throw InvalidPolicy("market base price must be >= 0");
            }
            if constexpr (std::is_same_v<T, market_price::Variable>) {
                if (p.a < 0 || p.b < 0) {
                    throw InvalidPolicy("market price coefficients must be >= 0");
                }
            }
        },
        policy);
}

Money provider_set_price(const MarketPricePolicy& policy, Rational utilization, Rational demand_index,
                         Money cost_floor) {
    validate(policy);
    if (utilization < 0 || utilization > 1) {
        throw InvalidPolicy("utilization must lie in [0, 1]");
    }
    if (demand_index < 0) {
        throw InvalidPolicy("demand index must be >= 0");
    }
    const Money price = std::visit(
        [&](const auto& p) -> Money {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, market_price::Fixed>) {
                return p.base;
            } else {
                const Rational excess = std::max(Rational{0}, demand_index - 1);
                return scale(p.base, Rational{1} + p.a * utilization + p.b * excess);
            }
        },
        policy);
    return max(price, cost_floor);
}

std::vector<std::int64_t> provider_select_venues(const std::vector<VenueEstimate>& estimates,
                                                 std::int64_t max_venues) {
    std::vector<VenueEstimate> positive;
    for (const auto& e : estimates) {
        if (e.estimated_utility > Money{0}) {
            positive.push_back(e);
        }
    }
    std::sort(positive.begin(), positive.end(), [](const VenueEstimate& a, const VenueEstimate& b) {
        if (a.estimated_utility != b.estimated_utility) {
            return a.estimated_utility > b.estimated_utility;
        }
        return a.venue < b.venue;
    });
    std::vector<std::int64_t> out;
    for (const auto& e : positive) {
        if (static_cast<std::int64_t>(out.size()) >= max_venues) {
            break;
        }
        out.push_back(e.venue);
    }
    return out;
}

std::optional<Money> procurement_unit_price(const MarketView& view) {
    if (view.last_clearing_price) {
        return view.last_clearing_price;
    }
    std::optional<Money> best;
    for (const auto& l : view.providers) {
        if (l.role == ParticipantRole::Provider && (!best || l.price_hint < *best)) {
            best = l.price_hint;
        }
    }
    return best;
}

std::optional<BrokerAction> evaluate_candidate(const BrokerCandidate& c, const MarketView& view,
                                               const RiskModel& risk) {
    const auto unit = procurement_unit_price(view);
    if (!unit) {
        return std::nullopt;
    }
    BrokerAction a;
    a.request = c.request;
    a.willingness = c.willingness;
    a.volume = c.volume;
    a.procurement_estimate = *unit * c.volume;
    Rational p{0};
    if (auto it = risk.lateness_probability.find(c.reliability_class); it != risk.lateness_probability.end()) {
        p = it->second;
    }
    const Wide linear = Wide{risk.penalty_rate.micros()} * std::max<SimTime>(0, risk.expected_lateness);
    const Money penalty{narrow(std::min<Wide>(linear, Wide{std::max(c.willingness, Money{0}).micros()}))};
    a.expected_penalty = scale(penalty, p);
    a.estimated_utility = c.willingness - a.procurement_estimate - a.expected_penalty;
    return a;
}

BrokerDecision broker_decide(const std::vector<BrokerCandidate>& candidates, const MarketView& view,
                             const RiskModel& risk) {
    std::vector<BrokerAction> pool;
    for (const auto& c : candidates) {
        auto a = evaluate_candidate(c, view, risk);
        if (a && a->estimated_utility > Money{0} && a->volume <= view.procurable_capacity) {
            pool.push_back(*a);
        }
    }
    std::sort(pool.begin(), pool.end(),
              [](const BrokerAction& x, const BrokerAction& y) { return x.request < y.request; });

    BrokerDecision d;
    std::vector<std::size_t> chosen;
    if (pool.size() <= kExactSubsetLimit) {
        Money best{0};
        std::uint32_t best_mask = 0;
        const std::uint32_t limit = 1U << pool.size();
        for (std::uint32_t mask = 1; mask < limit; ++mask) {
            std::int64_t volume = 0;
            Money sum{0};
            for (std::size_t i = 0; i < pool.size(); ++i) {
                if ((mask >> i) & 1U) {
                    volume += pool[i].volume;
                    sum += pool[i].estimated_utility;
                }
            }
            if (volume <= view.procurable_capacity && sum > best) {
                best = sum;
                best_mask = mask;
            }
        }
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if ((best_mask >> i) & 1U) {
                chosen.push_back(i);
            }
        }
    } else {
        d.exact = false;
        std::vector<std::size_t> order(pool.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            return pool[x].estimated_utility > pool[y].estimated_utility;
        });
        std::int64_t left = view.procurable_capacity;
        for (auto i : order) {
            if (pool[i].volume <= left) {
                left -= pool[i].volume;
                chosen.push_back(i);
            }
        }
        std::sort(chosen.begin(), chosen.end());
    }
    for (auto i : chosen) {
        d.engaged.push_back(pool[i]);
        d.estimated_utility += pool[i].estimated_utility;
    }
    return d;
}

} // namespace mocsim::exchange
