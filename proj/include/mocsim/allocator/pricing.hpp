#pragma once

#include <mocsim/allocator/request.hpp>

#include <string_view>
#include <variant>
#include <vector>

namespace mocsim::allocator {

inline constexpr SimTime kTicksPerDay = 86'400;

namespace pricing {

/// rate per compute-unit-tick
struct Fixed {
    Money rate;

    friend bool operator==(const Fixed&, const Fixed&) = default;
};

/// Fixed base rate, multiplied when the request is submitted inside a daily peak window.
struct PeakOffPeak {
    Money base_rate;
    Rational peak_multiplier{1};
    std::vector<Interval> peak_windows; ///< tick-of-day intervals within [0, kTicksPerDay)

    friend bool operator==(const PeakOffPeak&, const PeakOffPeak&) = default;
};

/// base_rate * (1 + alpha * utilization)
struct UtilizationLinear {
    Money base_rate;
    Rational alpha{0};

    friend bool operator==(const UtilizationLinear&, const UtilizationLinear&) = default;
};

} // namespace pricing

using PricingPolicy = std::variant<pricing::Fixed, pricing::PeakOffPeak, pricing::UtilizationLinear>;

[[nodiscard]] std::string_view kind_name(const PricingPolicy& p) noexcept;

/// Throws InvalidPolicy for negative rates or multipliers, or windows that
/// overlap or fall outside a day.
void validate(const PricingPolicy& policy);

[[nodiscard]] bool in_peak_window(const pricing::PeakOffPeak& policy, SimTime t) noexcept;

/// Price of a request under `policy` at the given cpu utilization in [0, 1].
/// Exact arithmetic, rounded half-up once at the end.
[[nodiscard]] Money quote(const ServiceRequest& request, const PricingPolicy& policy, Rational utilization);

/// Per-unit rate the policy would charge (before multiplying by volume).
[[nodiscard]] Rational unit_rate(const PricingPolicy& policy, SimTime submit_time, Rational utilization);

} // namespace mocsim::allocator
