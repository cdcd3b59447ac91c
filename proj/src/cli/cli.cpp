#include <mocsim/cli/cli.hpp>

#include <mocsim/core/error.hpp>
#include <mocsim/core/hash.hpp>
#include <mocsim/run/simulation.hpp>
#include <mocsim/workload/generator.hpp>
#include <mocsim/workload/scenario.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <variant>

namespace mocsim::cli {

namespace fs = std::filesystem;

namespace {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

int fail(std::ostream& err, int code, const std::string& message) {
    err << "error: " << message << '\n';
    return code;
}

std::uint64_t parse_u64(std::string_view text, const char* what) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc{} || ptr != end) {
        throw std::invalid_argument(std::string{what} + ": not an unsigned integer: '" + std::string{text} + "'");
    }
    return v;
}

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    }
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << content;
    f.close();
    if (!f) {
        throw IoError("cannot write " + path.string());
    }
}

std::variant<workload::Scenario, int> load(const std::string& path, std::ostream& err) {
    try {
        return workload::load_scenario_file(path);
    } catch (const ParseError& e) {
        return fail(err, kParseFailure, path + ": " + e.what());
    } catch (const ValidationError& e) {
        return fail(err, kValidationFailure, path + ": " + e.what());
    } catch (const std::exception& e) {
        return fail(err, kUsageOrIo, e.what());
    }
}

int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const IoError& e) {
        return fail(err, kUsageOrIo, e.what());
    } catch (const std::exception& e) {
        return fail(err, kInvariantFailure, std::string{"run aborted: "} + e.what());
    }
}

/// Runs `f(i)` for i in [0, n) on a small thread pool; results keep index
/// order and the lowest-index failure is rethrown.
template <class T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& f) {
    std::vector<std::optional<T>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(n, 1));
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(f(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) {
        pool.emplace_back(work);
    }
    work();
    for (auto& t : pool) {
        t.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    std::vector<T> out;
    out.reserve(n);
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

struct RunRow {
    std::uint64_t seed = 0;
    workload::Mode mode = workload::Mode::Market;
    std::uint64_t request_digest = 0;
    std::uint64_t trace_hash = 0;
    metrics::RunSummary summary;
};

RunRow run_one(const workload::Scenario& scenario, std::uint64_t seed, workload::Mode mode, const fs::path& dir,
               bool trace) {
    make_dir(dir);
    std::ofstream trace_file;
    run::RunOptions options;
    options.seed = seed;
    options.mode = mode;
    if (trace) {
        trace_file.open(dir / "trace.log", std::ios::binary | std::ios::trunc);
        if (!trace_file) {
            throw IoError("cannot write " + (dir / "trace.log").string());
        }
        options.trace_sink = &trace_file;
    }
    const auto r = run::run_scenario(scenario, options);
    if (trace) {
        trace_file.close();
        if (!trace_file) {
            throw IoError("cannot write " + (dir / "trace.log").string());
        }
    }
    write_file(dir / "summary.json", r.summary_document);
    write_file(dir / "metrics.csv", r.metrics_table);
    write_file(dir / "journal.csv", r.journal_table);
    write_file(dir / "invoices.csv", run::render_invoices(r.invoices));
    write_file(dir / "clearing.csv", run::render_clearing(r.clearing));
    return {r.seed, r.mode, r.request_digest, r.trace_hash, r.summary};
}

std::vector<std::uint64_t> seeds_of(const RunConfig& config, const workload::Scenario& scenario) {
    if (config.sweep) {
        return config.sweep->seeds();
    }
    return {config.seed.value_or(scenario.master_seed)};
}

std::string seed_dir(std::uint64_t seed) { return "seed-" + std::to_string(seed); }

std::string rate(std::int64_t num, std::int64_t den) {
    return to_decimal(den > 0 ? Rational{num, den} : Rational{0});
}

std::string mean(Wide sum, std::size_t n) { return to_decimal(Rational{narrow(sum), static_cast<std::int64_t>(n)}); }

} // namespace

std::vector<std::uint64_t> SeedRange::seeds() const {
    std::vector<std::uint64_t> out;
    for (std::uint64_t s = first;; ++s) {
        out.push_back(s);
        if (s == last) {
            break;
        }
    }
    return out;
}

SeedRange parse_seed_range(std::string_view text) {
    const auto dots = text.find("..");
    if (dots == std::string_view::npos) {
        throw std::invalid_argument("--seeds: expected A..B, got '" + std::string{text} + "'");
    }
    SeedRange r{parse_u64(text.substr(0, dots), "--seeds"), parse_u64(text.substr(dots + 2), "--seeds")};
    if (r.first > r.last) {
        throw std::invalid_argument("--seeds: empty range '" + std::string{text} + "'");
    }
    return r;
}

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    auto loaded = load(config.scenario_path, err);
    if (const int* code = std::get_if<int>(&loaded)) {
        return *code;
    }
    const auto& s = std::get<workload::Scenario>(loaded);
    out << "ok: " << config.scenario_path << " (scenario " << workload::scenario_digest(s) << ", "
        << s.providers.size() << " providers, " << s.brokers.size() << " brokers, " << s.consumers.size()
        << " consumers)\n";
    return kOk;
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    auto loaded = load(config.scenario_path, err);
    if (const int* code = std::get_if<int>(&loaded)) {
        return *code;
    }
    const auto scenario = std::get<workload::Scenario>(std::move(loaded));
    return guarded(err, [&] {
        const fs::path root{config.out_dir};
        if (!config.sweep) {
            const auto row = run_one(scenario, seeds_of(config, scenario).front(), scenario.mode, root, config.trace);
            out << "seed " << row.seed << " " << workload::to_string(row.mode) << ": " << row.summary.submitted
                << " submitted, " << row.summary.accepted << " accepted, " << row.summary.completed
                << " completed, " << row.summary.violated << " violated, revenue " << row.summary.revenue_total
                << "\n";
            out << "artifacts in " << root.string() << "\n";
            return kOk;
        }
        const auto seeds = seeds_of(config, scenario);
        const auto rows = parallel_map<RunRow>(seeds.size(), [&](std::size_t i) {
            return run_one(scenario, seeds[i], scenario.mode, root / seed_dir(seeds[i]), config.trace);
        });
        std::ostringstream table;
        table << "seed,mode,request_digest,trace_hash,submitted,accepted,rejected,completed,failed,violated,in_flight,"
                 "revenue_total,penalty_total,mean_price,mean_utilization\n";
        for (const auto& r : rows) {
            const auto& s = r.summary;
            table << r.seed << ',' << workload::to_string(r.mode) << ',' << hex64(r.request_digest) << ','
                  << hex64(r.trace_hash) << ',' << s.submitted << ',' << s.accepted << ',' << s.rejected << ','
                  << s.completed << ',' << s.failed << ',' << s.violated << ',' << s.in_flight << ','
                  << s.revenue_total << ',' << s.penalty_total << ',' << s.mean_price << ','
                  << to_decimal(s.mean_utilization) << '\n';
        }
        make_dir(root);
        write_file(root / "sweep.csv", table.str());
        out << table.str();
        return kOk;
    });
}

int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream& err) {
    auto loaded = load(config.scenario_path, err);
    if (const int* code = std::get_if<int>(&loaded)) {
        return *code;
    }
    const auto scenario = std::get<workload::Scenario>(std::move(loaded));
    return guarded(err, [&] {
        const fs::path root{config.out_dir};
        const auto seeds = seeds_of(config, scenario);
        const auto rows = parallel_map<RunRow>(seeds.size() * 2, [&](std::size_t i) {
            const auto seed = seeds[i / 2];
            const auto mode = i % 2 == 0 ? workload::Mode::Market : workload::Mode::Baseline;
            return run_one(scenario, seed, mode, root / seed_dir(seed) / std::string{workload::to_string(mode)},
                           config.trace);
        });

        std::ostringstream table;
        table << "seed,request_digest_market,request_digest_baseline,traces_identical,revenue_market,"
                 "revenue_baseline,revenue_delta,acceptance_market,acceptance_baseline,violations_market,"
                 "violations_baseline\n";
        bool all_identical = true;
        Wide rev_m = 0;
        Wide rev_b = 0;
        Wide acc_m_num = 0;
        Wide acc_b_num = 0;
        Wide sub_m = 0;
        Wide sub_b = 0;
        Wide vio_m = 0;
        Wide vio_b = 0;
        for (std::size_t k = 0; k < seeds.size(); ++k) {
            const auto& m = rows[2 * k];
            const auto& b = rows[2 * k + 1];
            const bool identical = m.request_digest == b.request_digest;
            all_identical = all_identical && identical;
            const auto& ms = m.summary;
            const auto& bs = b.summary;
            table << seeds[k] << ',' << hex64(m.request_digest) << ',' << hex64(b.request_digest) << ','
                  << (identical ? "true" : "false") << ',' << ms.revenue_total << ',' << bs.revenue_total << ','
                  << (ms.revenue_total - bs.revenue_total) << ',' << rate(ms.accepted, ms.submitted) << ','
                  << rate(bs.accepted, bs.submitted) << ',' << ms.violated << ',' << bs.violated << '\n';
            rev_m += ms.revenue_total.micros();
            rev_b += bs.revenue_total.micros();
            acc_m_num += ms.accepted;
            acc_b_num += bs.accepted;
            sub_m += ms.submitted;
            sub_b += bs.submitted;
            vio_m += ms.violated;
            vio_b += bs.violated;
        }
        const std::size_t n = seeds.size();
        table << "mean,,," << (all_identical ? "true" : "false") << ',' << mean(rev_m, n) << ',' << mean(rev_b, n)
              << ',' << mean(rev_m - rev_b, n) << ',' << rate(narrow(acc_m_num), narrow(sub_m)) << ','
              << rate(narrow(acc_b_num), narrow(sub_b)) << ',' << mean(vio_m, n) << ',' << mean(vio_b, n) << '\n';
        make_dir(root);
        write_file(root / "compare.csv", table.str());
        out << table.str();
        return all_identical ? kOk : fail(err, kInvariantFailure, "modes saw different request traces");
    });
}

int cmd_generate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    auto loaded = load(config.scenario_path, err);
    if (const int* code = std::get_if<int>(&loaded)) {
        return *code;
    }
    const auto scenario = std::get<workload::Scenario>(std::move(loaded));
    return guarded(err, [&] {
        const fs::path root{config.out_dir};
        for (const auto seed : seeds_of(config, scenario)) {
            const fs::path dir = config.sweep ? root / seed_dir(seed) : root;
            const auto requests = workload::generate_requests(scenario, seed);
            make_dir(dir);
            write_file(dir / "requests.csv", run::render_requests(requests));
            out << "seed " << seed << ": " << requests.size() << " requests, digest "
                << hex64(workload::request_digest(requests)) << " -> " << (dir / "requests.csv").string() << '\n';
        }
        return kOk;
    });
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"mocsim: market-oriented cloud allocation simulator"};
    RunConfig config;
    std::string mode = "run";
    std::string seed_text;
    std::string seeds_text;
    std::string trace_text = "on";
    const char* env_out = std::getenv(kOutDirVariable);
    config.out_dir = env_out != nullptr && *env_out != '\0' ? env_out : kDefaultOutDir;

    app.add_option("--mode", mode, "run, validate, compare or generate")
        ->check(CLI::IsMember({"run", "validate", "compare", "generate"}));
    app.add_option("--scenario", config.scenario_path, "scenario document")->required();
    app.add_option("--out", config.out_dir, std::string{"output directory (default $"} + kOutDirVariable + " or " +
                                                kDefaultOutDir + ")");
    app.add_option("--seed", seed_text, "seed override");
    app.add_option("--seeds", seeds_text, "inclusive seed range A..B");
    app.add_option("--trace", trace_text, "write trace.log")->check(CLI::IsMember({"on", "off"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        return fail(err, kUsageOrIo, e.what());
    }

    try {
        if (!seed_text.empty()) {
            config.seed = parse_u64(seed_text, "--seed");
        }
        if (!seeds_text.empty()) {
            config.sweep = parse_seed_range(seeds_text);
        }
    } catch (const std::invalid_argument& e) {
        return fail(err, kUsageOrIo, e.what());
    }
    if (config.seed && config.sweep) {
        return fail(err, kUsageOrIo, "--seed and --seeds are exclusive");
    }
    config.trace = trace_text == "on";

    if (mode == "validate") {
        config.command = Command::Validate;
        return cmd_validate(config, out, err);
    }
    if (mode == "compare") {
        config.command = Command::Compare;
        return cmd_compare(config, out, err);
    }
    if (mode == "generate") {
        config.command = Command::Generate;
        return cmd_generate(config, out, err);
    }
    return cmd_run(config, out, err);
}

} // namespace mocsim::cli
