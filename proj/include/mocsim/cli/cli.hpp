#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mocsim::cli {

enum ExitCode : int {
    kOk = 0,
    kUsageOrIo = 1,
    kParseFailure = 2,
    kValidationFailure = 3,
    kInvariantFailure = 4,
};

enum class Command { Run, Validate, Compare, Generate };

/// Inclusive seed range written `A..B`.
struct SeedRange {
    std::uint64_t first = 0;
    std::uint64_t last = 0;

    [[nodiscard]] std::vector<std::uint64_t> seeds() const;
};

/// Throws std::invalid_argument unless the text is `A..B` with A <= B.
[[nodiscard]] SeedRange parse_seed_range(std::string_view text);

struct RunConfig {
    Command command = Command::Run;
    std::string scenario_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<SeedRange> sweep;
    bool trace = true;
};

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirVariable = "MOCSIM_OUT_DIR";
inline constexpr const char* kDefaultOutDir = "out";

/// Full command line entry point. Returns the process exit code.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Commands on a parsed configuration.
int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_generate(const RunConfig& config, std::ostream& out, std::ostream& err);

} // namespace mocsim::cli
