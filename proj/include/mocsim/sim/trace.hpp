#pragma once

#include <mocsim/core/hash.hpp>
#include <mocsim/sim/event.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mocsim::sim {

/// One trace line: `fire_at,seq,kind,digest,f0,f1,f2,f3,f4,f5` where digest is
/// the hex FNV-1a of the payload.
[[nodiscard]] std::string format_trace_line(const Event& e);

/// Inverse of format_trace_line; nullopt on malformed input or digest mismatch.
[[nodiscard]] std::optional<Event> parse_trace_line(const std::string& line);

/// Streams trace lines to an optional sink and folds them into a running hash.
class TraceWriter {
public:
    TraceWriter() = default;
    explicit TraceWriter(std::ostream* sink) : sink_(sink) {}

    void write(const Event& e);

    [[nodiscard]] std::uint64_t hash() const noexcept { return hash_.digest(); }
    [[nodiscard]] std::uint64_t lines() const noexcept { return lines_; }

private:
    std::ostream* sink_ = nullptr;
    Fnv1a hash_;
    std::uint64_t lines_ = 0;
};

/// Read a whole trace stream; throws std::runtime_error naming the bad line.
[[nodiscard]] std::vector<Event> read_trace(std::istream& in);

} // namespace mocsim::sim
