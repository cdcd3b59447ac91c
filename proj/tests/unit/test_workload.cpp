#include <doctest.h>

#include <mocsim/core/error.hpp>
#include <mocsim/workload/generator.hpp>
#include <mocsim/workload/scenario.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

using namespace mocsim;
using namespace mocsim::workload;

namespace {

const std::string kMinimal = R"({
  "format_version": 1,
  "master_seed": 7,
  "horizon": 1000,
  "providers": [
    {"id": 1, "fleet": [{"cpu_capacity": 4, "mem_capacity": 4096}], "pricing": {"kind": "fixed", "rate": 100}}
  ],
  "consumers": [{"id": 2, "initial_balance": 1000000}],
  "workload": {"arrival": {"kind": "poisson", "rate": "1/10"}}
})";

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

std::string field_of(const std::string& doc) {
    try {
        (void)load_scenario(doc);
    } catch (const ValidationError& e) {
        return e.field();
    }
    return "<none>";
}

exchange::DirectoryListing broker(std::int64_t id, std::int64_t hint) {
    exchange::DirectoryListing l;
    l.participant = ParticipantId{id};
    l.role = exchange::ParticipantRole::Broker;
    l.capacity = 1;
    l.price_hint = Money{hint};
    l.window = {0, 100};
    l.valid_until = 100;
    return l;
}

TraceRequest trace_request(SimTime submit, std::int64_t volume) {
    TraceRequest r;
    r.submit_time = submit;
    r.consumer = ParticipantId{2};
    r.workload_volume = volume;
    r.cpu_need = 2;
    r.deadline = submit + 500;
    r.budget = Money{10'000};
    return r;
}

} // namespace

TEST_CASE("minimal scenario loads with defaults applied") {
    const Scenario s = load_scenario(kMinimal);
    CHECK(s.horizon == 1000);
    CHECK(s.master_seed == 7);
    REQUIRE(s.providers.size() == 1);
    CHECK(s.providers[0].total_cpu() == 4);
    CHECK(s.providers[0].fleet[0].count == 1);
    CHECK(std::holds_alternative<exchange::market_price::Fixed>(s.providers[0].market_price));
    CHECK(std::get<exchange::market_price::Fixed>(s.providers[0].market_price).base == Money{100});
    CHECK(s.consumers[0].budget_constraint == Money{1'000'000});
    CHECK(s.mode == Mode::Market);
    CHECK(s.baseline.fixed_rate == s.workload.reference_rate);
    REQUIRE(s.workload.classes.size() == 1);
    CHECK(s.workload.classes[0].weight == Rational{1});
}

TEST_CASE("validation errors name the offending field") {
    CHECK(field_of(replace(kMinimal, "\"cpu_capacity\": 4", "\"cpu_capacity\": -4")) ==
          "providers[0].fleet[0].cpu_capacity");
    CHECK(field_of(replace(kMinimal, "\"horizon\": 1000", "\"horizon\": 1000, \"bogus\": 1")) == "bogus");
    CHECK(field_of(replace(kMinimal, "\"horizon\": 1000", "\"horizon\": 0")) == "horizon");
    CHECK(field_of(replace(kMinimal, "\"rate\": \"1/10\"", "\"rate\": 0")) == "workload.arrival.rate");
    CHECK(field_of(replace(kMinimal, "\"id\": 2", "\"id\": 1")) == "consumers[0].id");
    CHECK(field_of(replace(kMinimal, "\"initial_balance\": 1000000", "\"initial_balance\": -1")) ==
          "consumers[0].initial_balance");
    CHECK(field_of(replace(kMinimal, "\"rate\": 100", "\"rate\": \"x\"")) == "providers[0].pricing.rate");
    CHECK(field_of(replace(kMinimal, "\"fixed\", \"rate\": 100", "\"fixed\", \"rate\": 100, \"alpha\": 1")) ==
          "providers[0].pricing.alpha");
    CHECK(field_of(replace(kMinimal, "\"format_version\": 1", "\"format_version\": 2")) == "format_version");
    CHECK(field_of(replace(kMinimal, "\"rate\": \"1/10\"}",
                           "\"rate\": \"1/10\"}, \"classes\": [{\"name\": \"a\", \"weight\": \"1/2\"}]")) ==
          "workload.classes");
}

TEST_CASE("malformed documents report a byte position") {
    try {
        (void)load_scenario("{\"horizon\": 10,,}");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 16); // 1-based: the second comma
    }
    CHECK_THROWS_AS((void)load_scenario(""), ParseError);
    CHECK_THROWS_AS((void)load_scenario("[1, 2]"), ValidationError);
}

TEST_CASE("unreadable file names the path") {
    try {
        (void)load_scenario_file("/nonexistent/scenario.json");
        FAIL("expected an error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("/nonexistent/scenario.json") != std::string::npos);
    }
}

TEST_CASE("trace references must resolve") {
    const auto doc = replace(kMinimal, R"({"kind": "poisson", "rate": "1/10"})",
                             R"({"kind": "trace", "requests": [{"submit_time": 0, "consumer": 9,
                               "workload_volume": 10, "cpu_need": 1, "deadline": 50, "budget": 100}]})");
    CHECK(field_of(doc) == "workload.arrival.requests[0].consumer");
}

TEST_CASE("scenario round-trip through the normalized document") {
    const std::string rich = R"({
      "format_version": 1, "master_seed": 18446744073709551615, "horizon": 5000, "drain": true, "mode": "baseline",
      "datacenter": {"boot_delay": 3, "placement": "best_fit"},
      "providers": [
        {"id": 1, "name": "p", "fleet": [{"count": 2, "cpu_capacity": 8, "mem_capacity": 100}],
         "reliability_class": 2, "security_class": 1,
         "pricing": {"kind": "peak_off_peak", "base_rate": 50, "peak_multiplier": "2", "peak_windows": [[100, 200]]},
         "market_price": {"kind": "variable", "base": 60, "a": "1/2", "b": "1/3"},
         "cost_floor": 10, "initial_balance": 5, "max_venues": 2},
        {"id": 3, "fleet": [{"cpu_capacity": 1, "mem_capacity": 0}],
         "pricing": {"kind": "utilization_linear", "base_rate": 70, "alpha": "3/2"}}
      ],
      "brokers": [{"id": 4, "procurement": "auction", "initial_balance": 100, "markup": "1/5"}],
      "consumers": [{"id": 2, "initial_balance": 100, "budget_constraint": 50, "use_brokers": true, "broker_k": 2}],
      "workload": {"arrival": {"kind": "trace", "requests": [
          {"submit_time": 4, "consumer": 2, "workload_volume": 10, "cpu_need": 1, "mem_need": 3, "deadline": 40,
           "budget": 1000, "reliability_class": 1}]},
        "demand_scale": "2", "volume": {"kind": "uniform", "lo": 0.25, "hi": 1.7},
        "cpu_need": {"kind": "uniform_int", "lo": 1, "hi": 4}, "mem_need": {"kind": "exponential", "rate": 0.3},
        "classes": [{"name": "gold", "weight": "1/3", "slack": "3/2", "budget_factor": 4},
                    {"name": "bronze", "weight": "2/3", "slack": 5, "budget_factor": "1/2"}],
        "reference_rate": 90},
      "exchange": {"auction_period": 30, "ask_lookahead": 600, "fee_rate": "1/100", "penalty_rate": 7,
        "negotiation": {"max_rounds": 5, "exponent": 3, "first_mover": "seller", "buyer_open": "1/4",
                        "seller_markup": "2"},
        "risk": {"lateness_probability": {"0": "1/10", "2": "0"}, "expected_lateness": 12}},
      "baseline": {"fixed_rate": 80},
      "admission": {"history_window": 100}
    })";
    for (const auto& doc : {kMinimal, rich}) {
        const Scenario a = load_scenario(doc);
        const std::string normalized = emit_scenario(a);
        const Scenario b = load_scenario(normalized);
        CHECK(a == b);
        CHECK(emit_scenario(b) == normalized);
        CHECK(scenario_digest(a) == scenario_digest(b));
    }
    const Scenario a = load_scenario(rich);
    CHECK(a.master_seed == 18446744073709551615ULL);
    CHECK(a.exchange.risk.lateness_probability.at(0) == Rational{1, 10});
    CHECK(a.brokers[0].procurement == Procurement::Auction);
}

TEST_CASE("round-trip of randomly built scenarios") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        Scenario s;
        s.master_seed = rng();
        s.horizon = 1 + static_cast<SimTime>(rng() % 100'000);
        s.drain = rng() % 2 == 0;
        s.mode = rng() % 2 == 0 ? Mode::Market : Mode::Baseline;
        s.datacenter.boot_delay = static_cast<SimTime>(rng() % 10);
        const auto providers = 1 + rng() % 3;
        std::int64_t next_id = static_cast<std::int64_t>(rng() % 5);
        for (std::uint64_t i = 0; i < providers; ++i) {
            ProviderSpec p;
            p.id = ParticipantId{next_id++};
            p.name = "p" + std::to_string(i);
            p.fleet.push_back({1 + static_cast<std::int64_t>(rng() % 4), {1 + static_cast<std::int64_t>(rng() % 16), 64}});
            const Money rate{static_cast<std::int64_t>(rng() % 1000)};
            switch (rng() % 3) {
            case 0:
                p.pricing = allocator::pricing::Fixed{rate};
                break;
            case 1:
                p.pricing = allocator::pricing::PeakOffPeak{rate, Rational{1 + static_cast<std::int64_t>(rng() % 5), 2},
                                                            {{0, 100}}};
                break;
            default:
                p.pricing = allocator::pricing::UtilizationLinear{rate, Rational{static_cast<std::int64_t>(rng() % 7), 3}};
            }
            p.market_price = exchange::market_price::Variable{rate, Rational{1, 3}, Rational{0}};
            s.providers.push_back(p);
        }
        ConsumerSpec c;
        c.id = ParticipantId{next_id++};
        c.name = "c";
        c.initial_balance = Money{static_cast<std::int64_t>(rng() % 1'000'000)};
        c.budget_constraint = c.initial_balance;
        s.consumers.push_back(c);
        s.workload.volume = sim::dist::Uniform{1.0 / static_cast<double>(1 + rng() % 9), 10.0 / 3.0};
        s.workload.arrival = PoissonArrival{Rational{1 + static_cast<std::int64_t>(rng() % 9), 7}};
        validate(s);
        const Scenario back = load_scenario(emit_scenario(s));
        REQUIRE(back == s);
    }
}

TEST_CASE("trace mode generates exactly the trace") {
    WorkloadSpec spec;
    spec.arrival = TraceArrival{};
    CHECK(generate_requests(spec, {ParticipantId{2}}, 1, 1000).empty());

    spec.arrival = TraceArrival{{trace_request(5, 10), trace_request(9, 20), trace_request(40, 30)}};
    const auto reqs = generate_requests(spec, {ParticipantId{2}}, 1, 1000);
    REQUIRE(reqs.size() == 3);
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        const auto& t = std::get<TraceArrival>(spec.arrival).requests[i];
        CHECK(reqs[i].id == RequestId{static_cast<std::int64_t>(i)});
        CHECK(reqs[i].submit_time == t.submit_time);
        CHECK(reqs[i].workload_volume == t.workload_volume);
        CHECK(reqs[i].qos.deadline == t.deadline);
        CHECK(reqs[i].qos.budget == t.budget);
    }
}

TEST_CASE("poisson arrival count stays within three sigma") {
    WorkloadSpec spec;
    spec.arrival = PoissonArrival{Rational{1, 10}};
    const double mean = 1000.0;
    const double sigma = std::sqrt(mean);
    double sum = 0;
    double sum_sq = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto n = static_cast<double>(generate_requests(spec, {ParticipantId{1}}, seed, 10'000).size());
        CHECK(std::abs(n - mean) <= 3 * sigma);
        sum += n;
        sum_sq += n * n;
    }
    const double sample_mean = sum / 100;
    const double sample_var = (sum_sq - 100 * sample_mean * sample_mean) / 99;
    CHECK(std::abs(sample_mean - mean) <= 3 * sigma / 10);
    // Poisson variance equals the mean; 99-dof sample variance stays within +-50% with overwhelming probability.
    CHECK(sample_var > 0.5 * mean);
    CHECK(sample_var < 1.5 * mean);
}

TEST_CASE("demand scale multiplies the arrival rate") {
    WorkloadSpec spec;
    spec.arrival = PoissonArrival{Rational{1, 20}};
    spec.demand_scale = Rational{4};
    const auto n = static_cast<double>(generate_requests(spec, {ParticipantId{1}}, 3, 10'000).size());
    CHECK(std::abs(n - 2000) <= 3 * std::sqrt(2000.0));
}

TEST_CASE("generated requests respect the deadline and budget formulas") {
    WorkloadSpec spec;
    spec.arrival = PoissonArrival{Rational{1, 5}};
    spec.volume = sim::dist::UniformInt{1, 500};
    spec.cpu_need = sim::dist::UniformInt{1, 8};
    spec.mem_need = sim::dist::UniformInt{0, 64};
    spec.classes = {QosClass{"tight", Rational{1, 4}, Rational{1}, Rational{3}, 1, 0},
                    QosClass{"loose", Rational{3, 4}, Rational{7, 2}, Rational{1, 3}, 0, 0}};
    spec.reference_rate = Money{70};
    const SimTime boot = 4;
    const std::vector<ParticipantId> consumers{ParticipantId{5}, ParticipantId{9}};
    const auto reqs = generate_requests(spec, consumers, 99, 2000, boot);
    REQUIRE(reqs.size() > 100);
    int tight = 0;
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        const auto& r = reqs[i];
        CHECK_NOTHROW(r.validate());
        if (i > 0) {
            CHECK(reqs[i - 1].submit_time <= r.submit_time);
        }
        CHECK(r.submit_time < 2000);
        CHECK((r.consumer == ParticipantId{5} || r.consumer == ParticipantId{9}));
        const std::int64_t runtime = boot + (r.workload_volume + r.cpu_need - 1) / r.cpu_need;
        if (r.qos.reliability_class == 1) {
            ++tight;
            CHECK(r.qos.deadline - r.submit_time == runtime);
            CHECK(r.qos.budget == Money{3 * 70 * r.workload_volume});
        } else {
            CHECK(r.qos.deadline - r.submit_time == (7 * runtime + 1) / 2);
            CHECK(r.qos.budget == Money{(70 * r.workload_volume + 2) / 3});
        }
    }
    CHECK(tight > 0);
    CHECK(tight < static_cast<int>(reqs.size()));
}

TEST_CASE("generator is deterministic per seed") {
    WorkloadSpec spec;
    spec.arrival = PoissonArrival{Rational{1, 3}};
    spec.volume = sim::dist::Exponential{0.01};
    const std::vector<ParticipantId> consumers{ParticipantId{1}, ParticipantId{2}, ParticipantId{3}};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto a = generate_requests(spec, consumers, seed, 3000);
        const auto b = generate_requests(spec, consumers, seed, 3000);
        CHECK(a == b);
        CHECK(request_digest(a) == request_digest(b));
        const auto c = generate_requests(spec, consumers, seed + 1000, 3000);
        CHECK(request_digest(a) != request_digest(c));
    }
}

TEST_CASE("proxy selects the cheapest brokers") {
    const ConsumerProxy proxy{ParticipantId{1}, Money{1'000'000}, Money{0}};
    const auto one = proxy_select_brokers(proxy, {broker(10, 5)}, 1, 10);
    REQUIRE(one.size() == 1);
    CHECK(one[0].participant == ParticipantId{10});

    const auto two = proxy_select_brokers(proxy, {broker(10, 9), broker(11, 7), broker(12, 8)}, 2, 10);
    REQUIRE(two.size() == 2);
    CHECK(two[0].price_hint == Money{7});
    CHECK(two[1].price_hint == Money{8});

    const auto ties = proxy_select_brokers(proxy, {broker(13, 7), broker(11, 7), broker(12, 7)}, 2, 10);
    CHECK(ties[0].participant == ParticipantId{11});
    CHECK(ties[1].participant == ParticipantId{12});
}

TEST_CASE("proxy keeps outstanding spend within the budget constraint") {
    const ConsumerProxy tight{ParticipantId{1}, Money{100}, Money{60}};
    CHECK_THROWS_AS((void)proxy_select_brokers(tight, {broker(10, 5), broker(11, 6)}, 2, 10), NoBrokerAvailable);
    CHECK_THROWS_AS((void)proxy_select_brokers(tight, {}, 1, 10), NoBrokerAvailable);
    const auto some = proxy_select_brokers(tight, {broker(10, 5), broker(11, 4)}, 2, 10);
    REQUIRE(some.size() == 1);
    CHECK(some[0].participant == ParticipantId{11});

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        const ConsumerProxy p{ParticipantId{1}, Money{static_cast<std::int64_t>(rng() % 1000)},
                              Money{static_cast<std::int64_t>(rng() % 500)}};
        std::vector<exchange::DirectoryListing> ls;
        const auto n = rng() % 6;
        for (std::uint64_t i = 0; i < n; ++i) {
            ls.push_back(broker(static_cast<std::int64_t>(i), static_cast<std::int64_t>(rng() % 20)));
        }
        const std::int64_t volume = 1 + static_cast<std::int64_t>(rng() % 40);
        const std::int64_t k = 1 + static_cast<std::int64_t>(rng() % 3);
        std::vector<exchange::DirectoryListing> ok;
        for (const auto& l : ls) {
            if (p.outstanding + l.price_hint * volume <= p.budget_constraint) {
                ok.push_back(l);
            }
        }
        if (ok.empty()) {
            CHECK_THROWS_AS((void)proxy_select_brokers(p, ls, k, volume), NoBrokerAvailable);
            continue;
        }
        const auto chosen = proxy_select_brokers(p, ls, k, volume);
        CHECK(static_cast<std::int64_t>(chosen.size()) == std::min<std::int64_t>(k, static_cast<std::int64_t>(ok.size())));
        for (const auto& c : chosen) {
            CHECK(p.affordable(c.price_hint * volume));
        }
        // No unchosen affordable broker is strictly cheaper than a chosen one.
        for (const auto& l : ok) {
            const bool picked = std::any_of(chosen.begin(), chosen.end(),
                                            [&](const auto& c) { return c.participant == l.participant; });
            if (!picked) {
                CHECK(l.price_hint >= chosen.back().price_hint);
            }
        }
    }
}
