#include <mocsim/core/types.hpp>

#include <limits>
#include <stdexcept>

namespace mocsim {

std::int64_t narrow(Wide v) {
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
        throw std::overflow_error("value does not fit in 64 bits");
    }
    return static_cast<std::int64_t>(v);
}

Money& Money::operator+=(Money o) {
    micros_ = narrow(Wide{micros_} + o.micros_);
    return *this;
}

Money& Money::operator-=(Money o) {
    micros_ = narrow(Wide{micros_} - o.micros_);
    return *this;
}

Money operator*(Money a, std::int64_t k) { return Money{narrow(Wide{a.micros_} * k)}; }

Wide floor_div(Wide num, Wide den) {
    if (den <= 0) {
        throw std::invalid_argument("floor_div: non-positive denominator");
    }
    Wide q = num / den;
    if ((num % den) != 0 && num < 0) {
        --q;
    }
    return q;
}

Wide ceil_div(Wide num, Wide den) { return -floor_div(-num, den); }

std::int64_t round_half_up(Wide num, Wide den) { return narrow(floor_div(2 * num + den, 2 * den)); }

Money scale(Money m, Rational r) {
    return Money{round_half_up(Wide{m.micros()} * r.numerator(), r.denominator())};
}

Money scale_floor(Money m, Rational r) {
    return Money{narrow(floor_div(Wide{m.micros()} * r.numerator(), r.denominator()))};
}

Rational parse_rational(const std::string& text) {
    auto parse_int = [&](const std::string& s) -> std::int64_t {
        if (s.empty()) {
            throw std::invalid_argument("empty number in '" + text + "'");
        }
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) {
            throw std::invalid_argument("not a number: '" + text + "'");
        }
        return v;
    };
    if (auto slash = text.find('/'); slash != std::string::npos) {
        const auto den = parse_int(text.substr(slash + 1));
        if (den == 0) {
            throw std::invalid_argument("zero denominator in '" + text + "'");
        }
        return {parse_int(text.substr(0, slash)), den};
    }
    if (auto dot = text.find('.'); dot != std::string::npos) {
        std::string frac = text.substr(dot + 1);
        if (frac.size() > 12) {
            throw std::invalid_argument("too many decimals in '" + text + "'");
        }
        std::string whole = text.substr(0, dot);
        const bool negative = !whole.empty() && whole.front() == '-';
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) {
            den *= 10;
        }
        const std::int64_t w = whole.empty() || whole == "-" ? 0 : parse_int(whole);
        const std::int64_t f = frac.empty() ? 0 : parse_int(frac);
        if (f < 0) {
            throw std::invalid_argument("not a number: '" + text + "'");
        }
        Rational r{w};
        r += negative ? Rational{-f, den} : Rational{f, den};
        return r;
    }
    return Rational{parse_int(text)};
}

std::string to_string(Rational r) {
    if (r.denominator() == 1) {
        return std::to_string(r.numerator());
    }
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

std::string to_decimal(Rational r, int digits) {
    Wide scale10 = 1;
    for (int i = 0; i < digits; ++i) {
        scale10 *= 10;
    }
    const std::int64_t scaled = round_half_up(Wide{r.numerator()} * scale10, r.denominator());
    const bool negative = scaled < 0;
    const Wide mag = negative ? -Wide{scaled} : Wide{scaled};
    const auto whole = static_cast<std::int64_t>(mag / scale10);
    auto frac = std::to_string(static_cast<std::int64_t>(mag % scale10));
    if (digits == 0) {
        return (negative ? "-" : "") + std::to_string(whole);
    }
    frac.insert(0, static_cast<std::size_t>(digits) - frac.size(), '0');
    return (negative ? "-" : "") + std::to_string(whole) + "." + frac;
}

} // namespace mocsim
