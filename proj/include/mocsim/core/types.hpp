#pragma once

#include <boost/rational.hpp>

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <string>

namespace mocsim {

/// Simulated time in ticks; one tick is one simulated second.
using SimTime = std::int64_t;

inline constexpr SimTime kNever = std::numeric_limits<SimTime>::max();

/// Exact rational used for multipliers, utilizations and fractions.
using Rational = boost::rational<std::int64_t>;

/// Half-open tick interval [begin, end).
struct Interval {
    SimTime begin = 0;
    SimTime end = 0;

    [[nodiscard]] constexpr SimTime length() const noexcept { return end > begin ? end - begin : 0; }
    [[nodiscard]] constexpr bool empty() const noexcept { return end <= begin; }
    [[nodiscard]] constexpr bool contains(SimTime t) const noexcept { return begin <= t && t < end; }
    [[nodiscard]] constexpr bool contains(const Interval& o) const noexcept {
        return begin <= o.begin && o.end <= end;
    }
    [[nodiscard]] constexpr bool overlaps(const Interval& o) const noexcept {
        return begin < o.end && o.begin < end;
    }
    [[nodiscard]] constexpr Interval intersect(const Interval& o) const noexcept {
        return {begin > o.begin ? begin : o.begin, end < o.end ? end : o.end};
    }

    friend constexpr bool operator==(const Interval&, const Interval&) = default;
    friend constexpr auto operator<=>(const Interval&, const Interval&) = default;
};

/// Tagged integer identifier. Distinct tags do not convert into each other.
template <class Tag>
struct Id {
    std::int64_t value = -1;

    constexpr Id() = default;
    constexpr explicit Id(std::int64_t v) : value(v) {}

    [[nodiscard]] constexpr bool valid() const noexcept { return value >= 0; }

    friend constexpr bool operator==(Id, Id) = default;
    friend constexpr auto operator<=>(Id, Id) = default;
    friend std::ostream& operator<<(std::ostream& os, Id id) { return os << id.value; }
};

using MachineId = Id<struct MachineTag>;
using VmId = Id<struct VmTag>;
using RequestId = Id<struct RequestTag>;
using SlaId = Id<struct SlaTag>;
using OrderId = Id<struct OrderTag>;
using AccountId = Id<struct AccountTag>;
using ReservationId = Id<struct ReservationTag>;
using ListingId = Id<struct ListingTag>;
using ParticipantId = Id<struct ParticipantTag>;

/// Integer micro-currency amount. Arithmetic is exact; overflow throws.
class Money {
public:
    constexpr Money() = default;
    constexpr explicit Money(std::int64_t micros) : micros_(micros) {}

    [[nodiscard]] constexpr std::int64_t micros() const noexcept { return micros_; }

    Money& operator+=(Money o);
    Money& operator-=(Money o);
    friend Money operator+(Money a, Money b) { return a += b; }
    friend Money operator-(Money a, Money b) { return a -= b; }
    friend Money operator-(Money a) { return Money{} - a; }
    friend Money operator*(Money a, std::int64_t k);
    friend Money operator*(std::int64_t k, Money a) { return a * k; }

    friend constexpr bool operator==(Money, Money) = default;
    friend constexpr auto operator<=>(Money, Money) = default;
    friend std::ostream& operator<<(std::ostream& os, Money m) { return os << m.micros_; }

private:
    std::int64_t micros_ = 0;
};

[[nodiscard]] constexpr Money min(Money a, Money b) noexcept { return a < b ? a : b; }
[[nodiscard]] constexpr Money max(Money a, Money b) noexcept { return a < b ? b : a; }

using Wide = __int128;

/// floor(num / den) for den > 0.
[[nodiscard]] Wide floor_div(Wide num, Wide den);

/// ceil(num / den) for den > 0.
[[nodiscard]] Wide ceil_div(Wide num, Wide den);

/// num / den rounded half-up (ties toward +infinity), den > 0.
[[nodiscard]] std::int64_t round_half_up(Wide num, Wide den);

/// m * r rounded half-up.
[[nodiscard]] Money scale(Money m, Rational r);

/// m * r rounded down.
[[nodiscard]] Money scale_floor(Money m, Rational r);

/// Narrow a wide value to int64, throwing std::overflow_error when it does not fit.
[[nodiscard]] std::int64_t narrow(Wide v);

/// Rational parsed from "3", "-2", "1/2" or "0.125". Throws std::invalid_argument.
[[nodiscard]] Rational parse_rational(const std::string& text);

/// Canonical text form: "3" or "1/2".
[[nodiscard]] std::string to_string(Rational r);

/// Fixed six-decimal rendering computed with integer arithmetic (deterministic).
[[nodiscard]] std::string to_decimal(Rational r, int digits = 6);

} // namespace mocsim

template <class Tag>
struct std::hash<mocsim::Id<Tag>> {
    std::size_t operator()(mocsim::Id<Tag> id) const noexcept { return std::hash<std::int64_t>{}(id.value); }
};
