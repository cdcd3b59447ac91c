#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <variant>

namespace mocsim::sim {

namespace dist {
struct Constant {
    double value = 0.0;

    friend bool operator==(const Constant&, const Constant&) = default;
};
/// Continuous uniform on [lo, hi); degenerate when lo == hi.
struct Uniform {
    double lo = 0.0;
    double hi = 0.0;

    friend bool operator==(const Uniform&, const Uniform&) = default;
};
/// Integer uniform on [lo, hi].
struct UniformInt {
    std::int64_t lo = 0;
    std::int64_t hi = 0;

    friend bool operator==(const UniformInt&, const UniformInt&) = default;
};
struct Exponential {
    double rate = 1.0;

    friend bool operator==(const Exponential&, const Exponential&) = default;
};
} // namespace dist

using Distribution = std::variant<dist::Constant, dist::Uniform, dist::UniformInt, dist::Exponential>;

/// Throws InvalidDistribution when parameters are undefined.
void validate(const Distribution& d);

/// Named, independently seeded random streams.
///
/// Each stream is a mt19937_64 seeded from (master_seed, stream_id) and all
/// distributions are computed here from raw 64-bit draws, so sequences are
/// identical across standard libraries and platforms.
class RngStreams {
public:
    explicit RngStreams(std::uint64_t master_seed) : master_seed_(master_seed) {}

    void register_stream(const std::string& stream_id);
    [[nodiscard]] bool has_stream(const std::string& stream_id) const { return streams_.contains(stream_id); }

    double draw(const std::string& stream_id, const Distribution& d);
    std::int64_t draw_int(const std::string& stream_id, std::int64_t lo, std::int64_t hi);
    /// Uniform on [0, 1) with 53 bits of precision.
    double draw_unit(const std::string& stream_id);

    [[nodiscard]] std::uint64_t master_seed() const noexcept { return master_seed_; }

private:
    std::mt19937_64& stream(const std::string& stream_id);

    std::uint64_t master_seed_;
    std::map<std::string, std::mt19937_64> streams_;
};

/// Seed for a named stream; exposed for tests.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master_seed, const std::string& stream_id) noexcept;

} // namespace mocsim::sim
