#include <mocsim/allocator/pricing.hpp>

#include <mocsim/core/error.hpp>

#include <algorithm>
#include <stdexcept>

namespace mocsim::allocator {

void ServiceRequest::validate() const {
    if (workload_volume <= 0) {
        throw std::invalid_argument("request " + std::to_string(id.value) + ": workload_volume must be > 0");
    }
    if (cpu_need <= 0) {
        throw std::invalid_argument("request " + std::to_string(id.value) + ": cpu_need must be > 0");
    }
    if (mem_need < 0) {
        throw std::invalid_argument("request " + std::to_string(id.value) + ": mem_need must be >= 0");
    }
    if (qos.budget < Money{0}) {
        throw std::invalid_argument("request " + std::to_string(id.value) + ": budget must be >= 0");
    }
    if (qos.deadline <= submit_time) {
        throw std::invalid_argument("request " + std::to_string(id.value) + ": deadline must follow submission");
    }
}

std::string_view kind_name(const PricingPolicy& p) noexcept {
    switch (p.index()) {
    case 0:
        return "fixed";
    case 1:
        return "peak_off_peak";
    default:
        return "utilization_linear";
    }
}

void validate(const PricingPolicy& policy) {
    std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, pricing::Fixed>) {
                if (p.rate < Money{0}) {
                    throw InvalidPolicy("fixed rate must be >= 0");
                }
            } else if constexpr (std::is_same_v<T, pricing::PeakOffPeak>) {
                if (p.base_rate < Money{0} || p.peak_multiplier < 0) {
                    throw InvalidPolicy("peak/off-peak rates and multiplier must be >= 0");
                }
                auto windows = p.peak_windows;
                std::sort(windows.begin(), windows.end());
                for (std::size_t i = 0; i < windows.size(); ++i) {
                    const auto& w = windows[i];
                    if (w.begin < 0 || w.end > kTicksPerDay || w.empty()) {
                        throw InvalidPolicy("peak window must be a non-empty interval within one day");
                    }
                    if (i > 0 && windows[i - 1].overlaps(w)) {
                        throw InvalidPolicy("peak windows overlap");
                    }
                }
            } else {
                if (p.base_rate < Money{0} || p.alpha < 0) {
                    throw InvalidPolicy("utilization-linear base rate and alpha must be >= 0");
                }
            }
        },
        policy);
}

bool in_peak_window(const pricing::PeakOffPeak& policy, SimTime t) noexcept {
    const SimTime tod = ((t % kTicksPerDay) + kTicksPerDay) % kTicksPerDay;
    return std::any_of(policy.peak_windows.begin(), policy.peak_windows.end(),
                       [tod](const Interval& w) { return w.contains(tod); });
}

Rational unit_rate(const PricingPolicy& policy, SimTime submit_time, Rational utilization) {
    validate(policy);
    if (utilization < 0 || utilization > 1) {
        throw InvalidPolicy("utilization must lie in [0, 1]");
    }
    return std::visit(
        [&](const auto& p) -> Rational {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, pricing::Fixed>) {
                return Rational{p.rate.micros()};
            } else if constexpr (std::is_same_v<T, pricing::PeakOffPeak>) {
                const Rational base{p.base_rate.micros()};
                return in_peak_window(p, submit_time) ? base * p.peak_multiplier : base;
            } else {
                return Rational{p.base_rate.micros()} * (Rational{1} + p.alpha * utilization);
            }
        },
        policy);
}

Money quote(const ServiceRequest& request, const PricingPolicy& policy, Rational utilization) {
    const Rational rate = unit_rate(policy, request.submit_time, utilization);
    return Money{round_half_up(Wide{rate.numerator()} * request.workload_volume, rate.denominator())};
}

} // namespace mocsim::allocator
