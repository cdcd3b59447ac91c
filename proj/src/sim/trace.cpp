#include <mocsim/sim/trace.hpp>

#include <charconv>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string_view>

namespace mocsim::sim {

std::string format_trace_line(const Event& e) {
    std::string line;
    line.reserve(96);
    line += std::to_string(e.fire_at);
    line += ',';
    line += std::to_string(e.seq);
    line += ',';
    line += to_string(e.kind);
    line += ',';
    line += hex64(e.payload.digest());
    for (auto v : e.payload.f) {
        line += ',';
        line += std::to_string(v);
    }
    return line;
}

std::optional<Event> parse_trace_line(const std::string& line) {
    std::vector<std::string_view> cols;
    std::string_view rest(line);
    while (true) {
        auto comma = rest.find(',');
        cols.push_back(rest.substr(0, comma));
        if (comma == std::string_view::npos) {
            break;
        }
        rest.remove_prefix(comma + 1);
    }
    if (cols.size() != 10) {
        return std::nullopt;
    }
    auto to_i64 = [](std::string_view s, auto& out) {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc{} && p == s.data() + s.size();
    };
    Event e;
    if (!to_i64(cols[0], e.fire_at) || !to_i64(cols[1], e.seq)) {
        return std::nullopt;
    }
    auto kind = event_kind_from_string(cols[2]);
    if (!kind) {
        return std::nullopt;
    }
    e.kind = *kind;
    for (std::size_t i = 0; i < 6; ++i) {
        if (!to_i64(cols[4 + i], e.payload.f[i])) {
            return std::nullopt;
        }
    }
    if (hex64(e.payload.digest()) != cols[3]) {
        return std::nullopt;
    }
    return e;
}

void TraceWriter::write(const Event& e) {
    const auto line = format_trace_line(e);
    hash_.update(line).update("\n");
    ++lines_;
    if (sink_ != nullptr) {
        *sink_ << line << '\n';
    }
}

std::vector<Event> read_trace(std::istream& in) {
    std::vector<Event> events;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) {
            continue;
        }
        auto e = parse_trace_line(line);
        if (!e) {
            throw std::runtime_error("malformed trace line " + std::to_string(n));
        }
        events.push_back(*e);
    }
    return events;
}

} // namespace mocsim::sim
