#include <mocsim/core/step_profile.hpp>

#include <algorithm>
#include <iterator>

namespace mocsim {

namespace {

// First point in [from, from + duration) where level + need exceeds cap, or nullopt.
std::optional<SimTime> first_violation(const std::map<SimTime, std::int64_t>& levels, SimTime from,
                                       SimTime duration, std::int64_t need, std::int64_t cap) {
    auto it = levels.upper_bound(from);
    const std::int64_t at_from = it == levels.begin() ? 0 : std::prev(it)->second;
    if (at_from + need > cap) {
        return from;
    }
    const SimTime end = from + duration;
    for (; it != levels.end() && it->first < end; ++it) {
        if (it->second + need > cap) {
            return it->first;
        }
    }
    return std::nullopt;
}

// Next breakpoint strictly after t, or nullopt when the level never changes again.
std::optional<SimTime> next_change(const std::map<SimTime, std::int64_t>& levels, SimTime t) {
    auto it = levels.upper_bound(t);
    if (it == levels.end()) {
        return std::nullopt;
    }
    return it->first;
}

} // namespace

void StepProfile::split_at(SimTime t) {
    auto it = levels_.lower_bound(t);
    if (it != levels_.end() && it->first == t) {
        return;
    }
    const std::int64_t level = it == levels_.begin() ? 0 : std::prev(it)->second;
    levels_.emplace_hint(it, t, level);
}

void StepProfile::add(Interval window, std::int64_t amount) {
    if (window.empty() || amount == 0) {
        return;
    }
    split_at(window.begin);
    split_at(window.end);
    for (auto it = levels_.find(window.begin); it != levels_.end() && it->first < window.end; ++it) {
        it->second += amount;
    }
    // Coalesce the two touched boundaries so the map does not grow without bound.
    for (SimTime t : {window.end, window.begin}) {
        auto it = levels_.find(t);
        if (it == levels_.end()) {
            continue;
        }
        const std::int64_t before = it == levels_.begin() ? 0 : std::prev(it)->second;
        if (before == it->second) {
            levels_.erase(it);
        }
    }
}

std::int64_t StepProfile::level_at(SimTime t) const {
    auto it = levels_.upper_bound(t);
    return it == levels_.begin() ? 0 : std::prev(it)->second;
}

std::int64_t StepProfile::max_over(Interval window) const {
    if (window.empty()) {
        return 0;
    }
    std::int64_t best = level_at(window.begin);
    for (auto it = levels_.upper_bound(window.begin); it != levels_.end() && it->first < window.end; ++it) {
        best = std::max(best, it->second);
    }
    return best;
}

Wide StepProfile::area(Interval window) const {
    if (window.empty()) {
        return 0;
    }
    Wide total = 0;
    SimTime cursor = window.begin;
    std::int64_t level = level_at(cursor);
    for (auto it = levels_.upper_bound(window.begin); it != levels_.end() && it->first < window.end; ++it) {
        total += Wide{level} * (it->first - cursor);
        cursor = it->first;
        level = it->second;
    }
    total += Wide{level} * (window.end - cursor);
    return total;
}

void StepProfile::prune_before(SimTime t) {
    auto it = levels_.upper_bound(t);
    if (it == levels_.begin()) {
        return;
    }
    const std::int64_t level = std::prev(it)->second;
    levels_.erase(levels_.begin(), it);
    if (level != 0) {
        levels_.emplace(t, level);
    }
}

std::optional<SimTime> StepProfile::earliest_fit(SimTime earliest, SimTime latest_start, SimTime duration,
                                                 std::int64_t need, std::int64_t cap) const {
    StepProfile none;
    return earliest_joint_fit(*this, need, cap, none, 0, 0, earliest, latest_start, duration);
}

std::optional<SimTime> earliest_joint_fit(const StepProfile& a, std::int64_t need_a, std::int64_t cap_a,
                                          const StepProfile& b, std::int64_t need_b, std::int64_t cap_b,
                                          SimTime earliest, SimTime latest_start, SimTime duration) {
    if (need_a > cap_a || need_b > cap_b) {
        return std::nullopt;
    }
    SimTime t = earliest;
    while (t <= latest_start) {
        if (auto v = first_violation(a.levels_, t, duration, need_a, cap_a)) {
            auto next = next_change(a.levels_, *v);
            if (!next) {
                return std::nullopt;
            }
            t = *next;
            continue;
        }
        if (auto v = first_violation(b.levels_, t, duration, need_b, cap_b)) {
            auto next = next_change(b.levels_, *v);
            if (!next) {
                return std::nullopt;
            }
            t = *next;
            continue;
        }
        return t;
    }
    return std::nullopt;
}

} // namespace mocsim
