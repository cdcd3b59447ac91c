#include <mocsim/sim/rng.hpp>

#include <mocsim/core/error.hpp>
#include <mocsim/core/hash.hpp>

#include <cmath>
#include <limits>

namespace mocsim::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double unit(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

std::int64_t uniform_int(std::mt19937_64& g, std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (span == std::numeric_limits<std::uint64_t>::max()) {
        return static_cast<std::int64_t>(g());
    }
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % range);
    std::uint64_t x = g();
    while (x >= limit) {
        x = g();
    }
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + x % range);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master_seed, const std::string& stream_id) noexcept {
    return splitmix64(master_seed ^ fnv1a(stream_id));
}

void validate(const Distribution& d) {
    std::visit(
        [](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, dist::Constant>) {
                if (!std::isfinite(v.value)) {
                    throw InvalidDistribution("constant must be finite");
                }
            } else if constexpr (std::is_same_v<T, dist::Uniform>) {
                if (!std::isfinite(v.lo) || !std::isfinite(v.hi) || v.lo > v.hi) {
                    throw InvalidDistribution("uniform requires finite lo <= hi");
                }
            } else if constexpr (std::is_same_v<T, dist::UniformInt>) {
                if (v.lo > v.hi) {
                    throw InvalidDistribution("uniform_int requires lo <= hi");
                }
            } else {
                if (!(v.rate > 0.0) || !std::isfinite(v.rate)) {
                    throw InvalidDistribution("exponential requires rate > 0");
                }
            }
        },
        d);
}

void RngStreams::register_stream(const std::string& stream_id) {
    streams_.try_emplace(stream_id, derive_seed(master_seed_, stream_id));
}

std::mt19937_64& RngStreams::stream(const std::string& stream_id) {
    auto it = streams_.find(stream_id);
    if (it == streams_.end()) {
        throw UnknownStream("no random stream named '" + stream_id + "'");
    }
    return it->second;
}

double RngStreams::draw_unit(const std::string& stream_id) { return unit(stream(stream_id)); }

std::int64_t RngStreams::draw_int(const std::string& stream_id, std::int64_t lo, std::int64_t hi) {
    validate(dist::UniformInt{lo, hi});
    return uniform_int(stream(stream_id), lo, hi);
}

double RngStreams::draw(const std::string& stream_id, const Distribution& d) {
    auto& g = stream(stream_id);
    validate(d);
    return std::visit(
        [&g](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, dist::Constant>) {
                return v.value;
            } else if constexpr (std::is_same_v<T, dist::Uniform>) {
                return v.lo + unit(g) * (v.hi - v.lo);
            } else if constexpr (std::is_same_v<T, dist::UniformInt>) {
                return static_cast<double>(uniform_int(g, v.lo, v.hi));
            } else {
                return -std::log1p(-unit(g)) / v.rate;
            }
        },
        d);
}

} // namespace mocsim::sim
