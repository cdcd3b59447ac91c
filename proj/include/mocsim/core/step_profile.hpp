#pragma once

#include <mocsim/core/types.hpp>

#include <cstdint>
#include <map>
#include <optional>

namespace mocsim {

/// Piecewise-constant usage over time. Level is zero before the first breakpoint.
///
/// Used as the commitment calendar of a machine and as a provider's reservation
/// book; both need "largest usage inside a window" and "earliest window of a
/// given length that stays under a cap".
class StepProfile {
public:
    void add(Interval window, std::int64_t amount);

    [[nodiscard]] std::int64_t level_at(SimTime t) const;

    /// Largest level over the window; 0 for an empty window.
    [[nodiscard]] std::int64_t max_over(Interval window) const;

    /// Earliest start s in [earliest, latest_start] such that level + need <= cap
    /// holds on [s, s + duration).
    [[nodiscard]] std::optional<SimTime> earliest_fit(SimTime earliest, SimTime latest_start, SimTime duration,
                                                      std::int64_t need, std::int64_t cap) const;

    /// Integral of level over the window.
    [[nodiscard]] Wide area(Interval window) const;

    /// Drop breakpoints strictly before t, keeping the level at t.
    void prune_before(SimTime t);

    [[nodiscard]] std::size_t breakpoints() const noexcept { return levels_.size(); }

private:
    friend std::optional<SimTime> earliest_joint_fit(const StepProfile&, std::int64_t, std::int64_t,
                                                     const StepProfile&, std::int64_t, std::int64_t, SimTime,
                                                     SimTime, SimTime);

    void split_at(SimTime t);

    std::map<SimTime, std::int64_t> levels_;
};

/// Joint earliest fit over two profiles with independent caps (cpu and memory).
[[nodiscard]] std::optional<SimTime> earliest_joint_fit(const StepProfile& a, std::int64_t need_a, std::int64_t cap_a,
                                                        const StepProfile& b, std::int64_t need_b, std::int64_t cap_b,
                                                        SimTime earliest, SimTime latest_start, SimTime duration);

} // namespace mocsim
