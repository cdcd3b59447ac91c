#include <doctest.h>

#include <mocsim/cli/cli.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace mocsim;
namespace fs = std::filesystem;

namespace {

const std::string kExample = std::string{MOCSIM_SOURCE_DIR} + "/scenarios/example.json";

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "mocsim");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("mocsim-cli-" + std::to_string(::getpid()) + "-" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

fs::path write_scenario(const fs::path& dir, const std::string& name, const std::string& body) {
    fs::create_directories(dir);
    const auto p = dir / name;
    std::ofstream(p) << body;
    return p;
}

const std::string kSingleRequest = R"({
  "format_version": 1,
  "horizon": 1000,
  "drain": true,
  "providers": [
    {"id": 1, "fleet": [{"cpu_capacity": 4, "mem_capacity": 4096}], "pricing": {"kind": "fixed", "rate": 100}}
  ],
  "consumers": [{"id": 2, "initial_balance": 1000000}],
  "workload": {"arrival": {"kind": "trace", "requests": [
    {"submit_time": 0, "consumer": 2, "workload_volume": 40, "cpu_need": 2, "mem_need": 0, "deadline": 100, "budget": 10000}
  ]}},
  "baseline": {"fixed_rate": 100}
})";

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) {
        out.push_back(l);
    }
    return out;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string cell; std::getline(in, cell, ',');) {
        out.push_back(cell);
    }
    return out;
}

} // namespace

TEST_CASE("seed ranges") {
    CHECK(cli::parse_seed_range("1..3").seeds() == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(cli::parse_seed_range("7..7").seeds() == std::vector<std::uint64_t>{7});
    CHECK_THROWS_AS((void)cli::parse_seed_range("3..1"), std::invalid_argument);
    CHECK_THROWS_AS((void)cli::parse_seed_range("3"), std::invalid_argument);
    CHECK_THROWS_AS((void)cli::parse_seed_range("a..4"), std::invalid_argument);
    CHECK_THROWS_AS((void)cli::parse_seed_range("1..-4"), std::invalid_argument);
}

TEST_CASE("validate exit codes") {
    const auto dir = scratch("validate");
    SUBCASE("shipped example") {
        const auto r = invoke({"--mode", "validate", "--scenario", kExample});
        CHECK(r.code == cli::kOk);
        CHECK(r.out.find("ok: ") == 0);
    }
    SUBCASE("missing file names the path") {
        const auto missing = (dir / "absent.json").string();
        const auto r = invoke({"--mode", "validate", "--scenario", missing});
        CHECK(r.code == cli::kUsageOrIo);
        CHECK(r.err.find(missing) != std::string::npos);
    }
    SUBCASE("malformed document") {
        const auto p = write_scenario(dir, "broken.json", "{\"horizon\": 10,,}");
        const auto r = invoke({"--mode", "validate", "--scenario", p.string()});
        CHECK(r.code == cli::kParseFailure);
        CHECK(r.err.find("ParseError") != std::string::npos);
    }
    SUBCASE("invalid field is named") {
        std::string body = kSingleRequest;
        body.replace(body.find("\"cpu_capacity\": 4"), 17, "\"cpu_capacity\": -4");
        const auto p = write_scenario(dir, "invalid.json", body);
        const auto r = invoke({"--mode", "validate", "--scenario", p.string()});
        CHECK(r.code == cli::kValidationFailure);
        CHECK(r.err.find("providers[0].fleet[0].cpu_capacity") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("run writes no artifacts for an invalid scenario") {
    const auto dir = scratch("noartifacts");
    std::string body = kSingleRequest;
    body.replace(body.find("\"horizon\": 1000"), 15, "\"horizon\": 0");
    const auto p = write_scenario(dir, "invalid.json", body);
    const auto out = dir / "out";
    const auto r = invoke({"--scenario", p.string(), "--out", out.string()});
    CHECK(r.code == cli::kValidationFailure);
    CHECK_FALSE(fs::exists(out));
    fs::remove_all(dir);
}

TEST_CASE("run emits the artifacts and repeats byte for byte") {
    const auto dir = scratch("run");
    const auto a = dir / "a";
    const auto b = dir / "b";
    REQUIRE(invoke({"--scenario", kExample, "--out", a.string(), "--seed", "42"}).code == cli::kOk);
    REQUIRE(invoke({"--mode", "run", "--scenario", kExample, "--out", b.string(), "--seed", "42"}).code == cli::kOk);
    for (const char* name : {"summary.json", "metrics.csv", "trace.log", "journal.csv", "invoices.csv",
                             "clearing.csv"}) {
        CAPTURE(name);
        REQUIRE(fs::exists(a / name));
        CHECK(!slurp(a / name).empty());
        CHECK(slurp(a / name) == slurp(b / name));
    }
    CHECK(slurp(a / "summary.json").find("\"seed\": 42") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("trace off skips the trace file") {
    const auto dir = scratch("traceoff");
    REQUIRE(invoke({"--scenario", kExample, "--out", dir.string(), "--trace", "off"}).code == cli::kOk);
    CHECK(fs::exists(dir / "summary.json"));
    CHECK_FALSE(fs::exists(dir / "trace.log"));
    fs::remove_all(dir);
}

TEST_CASE("sweep writes one row per seed") {
    const auto dir = scratch("sweep");
    const auto r = invoke({"--scenario", kExample, "--out", dir.string(), "--seeds", "1..10", "--trace", "off"});
    REQUIRE(r.code == cli::kOk);
    const auto rows = lines(slurp(dir / "sweep.csv"));
    REQUIRE(rows.size() == 11);
    CHECK(rows[0].rfind("seed,mode,request_digest", 0) == 0);
    for (std::uint64_t s = 1; s <= 10; ++s) {
        CHECK(split(rows[s])[0] == std::to_string(s));
        CHECK(fs::exists(dir / ("seed-" + std::to_string(s)) / "summary.json"));
    }
    fs::remove_all(dir);
}

TEST_CASE("compare pairs identical request traces") {
    const auto dir = scratch("compare");
    const auto r = invoke({"--mode", "compare", "--scenario", kExample, "--out", dir.string(), "--seeds", "3..5",
                        "--trace", "off"});
    REQUIRE(r.code == cli::kOk);
    const auto rows = lines(slurp(dir / "compare.csv"));
    REQUIRE(rows.size() == 5);
    const auto header = split(rows[0]);
    CHECK(std::find(header.begin(), header.end(), "revenue_delta") != header.end());
    for (std::size_t i = 1; i <= 3; ++i) {
        const auto cells = split(rows[i]);
        CHECK(cells[1] == cells[2]);
        CHECK(cells[3] == "true");
        CHECK(std::stoll(cells[6]) == std::stoll(cells[4]) - std::stoll(cells[5]));
    }
    CHECK(split(rows[4])[0] == "mean");
    CHECK(fs::exists(dir / "seed-3" / "market" / "summary.json"));
    CHECK(fs::exists(dir / "seed-3" / "baseline" / "summary.json"));
    fs::remove_all(dir);
}

TEST_CASE("a single request gives the same outcome in both modes") {
    const auto dir = scratch("degenerate");
    const auto p = write_scenario(dir, "one.json", kSingleRequest);
    const auto r = invoke({"--mode", "compare", "--scenario", p.string(), "--out", (dir / "out").string()});
    REQUIRE(r.code == cli::kOk);
    const auto cells = split(lines(slurp(dir / "out" / "compare.csv"))[1]);
    CHECK(cells[4] == cells[5]);
    CHECK(cells[6] == "0");
    CHECK(cells[7] == cells[8]);
    CHECK(cells[9] == cells[10]);
    fs::remove_all(dir);
}

TEST_CASE("generate writes the request list") {
    const auto dir = scratch("generate");
    const auto r = invoke({"--mode", "generate", "--scenario", kExample, "--out", dir.string(), "--seed", "9"});
    REQUIRE(r.code == cli::kOk);
    const auto rows = lines(slurp(dir / "requests.csv"));
    REQUIRE(rows.size() > 1);
    CHECK(rows[0].rfind("request_id,consumer,submit_time", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("usage errors") {
    CHECK(invoke({"--scenario", kExample, "--seed", "1", "--seeds", "1..2"}).code == cli::kUsageOrIo);
    CHECK(invoke({"--scenario", kExample, "--seeds", "5..1"}).code == cli::kUsageOrIo);
    CHECK(invoke({"--scenario", kExample, "--seed", "x"}).code == cli::kUsageOrIo);
    CHECK(invoke({"--mode", "dance", "--scenario", kExample}).code == cli::kUsageOrIo);
    CHECK(invoke({"--mode", "validate"}).code == cli::kUsageOrIo);
    CHECK(invoke({"--scenario", kExample, "--trace", "maybe"}).code == cli::kUsageOrIo);
    const auto help = invoke({"--help"});
    CHECK(help.code == cli::kOk);
    CHECK(help.out.find("--scenario") != std::string::npos);
}

TEST_CASE("arithmetic failure during a run exits with the invariant code") {
    const auto dir = scratch("overflow");
    std::string body = kSingleRequest;
    body.replace(body.find("\"initial_balance\": 1000000"), 26,
                 "\"initial_balance\": 9000000000000000000}, {\"id\": 3, \"initial_balance\": 9000000000000000000");
    const auto p = write_scenario(dir, "overflow.json", body);
    const auto r = invoke({"--scenario", p.string(), "--out", (dir / "out").string()});
    CHECK(r.code == cli::kInvariantFailure);
    CHECK(r.err.find("run aborted") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("output directory defaults to the environment") {
    const auto dir = scratch("env");
    ::setenv(cli::kOutDirVariable, dir.string().c_str(), 1);
    const auto r = invoke({"--scenario", kExample, "--trace", "off"});
    ::unsetenv(cli::kOutDirVariable);
    CHECK(r.code == cli::kOk);
    CHECK(fs::exists(dir / "summary.json"));
    fs::remove_all(dir);
}

TEST_CASE("installed binary honours the exit-code contract") {
    const auto dir = scratch("binary");
    const auto p = write_scenario(dir, "broken.json", "{");
    auto status = [](const std::string& cmd) {
        const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    const std::string bin = MOCSIM_CLI_PATH;
    CHECK(status(bin + " --mode validate --scenario " + kExample) == 0);
    CHECK(status(bin + " --mode validate --scenario " + p.string()) == 2);
    CHECK(status(bin + " --mode validate --scenario " + (dir / "absent.json").string()) == 1);
    fs::remove_all(dir);
}
