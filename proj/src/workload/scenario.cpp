#include <mocsim/workload/scenario.hpp>

#include <mocsim/core/error.hpp>
#include <mocsim/core/hash.hpp>

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace mocsim::workload {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Mode m) noexcept { return m == Mode::Market ? "market" : "baseline"; }

std::string_view to_string(Procurement p) noexcept {
    return p == Procurement::Negotiation ? "negotiation" : "auction";
}

std::int64_t ProviderSpec::total_cpu() const noexcept {
    std::int64_t total = 0;
    for (const auto& g : fleet) {
        total += g.count * g.spec.cpu_capacity;
    }
    return total;
}

namespace {

std::string child(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

/// Strict view of a JSON object: unknown keys fail on construction.
class Obj {
public:
    Obj(const json& j, std::string path, std::initializer_list<std::string_view> allowed) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) {
            throw ValidationError(path_.empty() ? "<root>" : path_, "expected an object");
        }
        for (const auto& [key, value] : j.items()) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
                throw ValidationError(child(path_, key), "unknown key");
            }
        }
    }

    [[nodiscard]] const json* find(std::string_view key) const {
        auto it = j_.find(std::string(key));
        return it == j_.end() ? nullptr : &*it;
    }

    [[nodiscard]] const json& require(std::string_view key) const {
        const json* v = find(key);
        if (v == nullptr) {
            throw ValidationError(child(path_, key), "required field missing");
        }
        return *v;
    }

    [[nodiscard]] std::string path(std::string_view key) const { return child(path_, key); }

private:
    const json& j_;
    std::string path_;
};

std::int64_t as_int(const json& v, const std::string& path) {
    if (v.is_number_integer()) {
        if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
            throw ValidationError(path, "integer out of range");
        }
        return v.get<std::int64_t>();
    }
    throw ValidationError(path, "expected an integer");
}

std::int32_t as_int32(const json& v, const std::string& path) {
    const auto x = as_int(v, path);
    if (x < INT32_MIN || x > INT32_MAX) {
        throw ValidationError(path, "integer out of range");
    }
    return static_cast<std::int32_t>(x);
}

std::uint64_t as_uint(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) {
        return v.get<std::uint64_t>();
    }
    if (v.is_number_integer()) {
        throw ValidationError(path, "must be >= 0");
    }
    throw ValidationError(path, "expected an integer");
}

double as_double(const json& v, const std::string& path) {
    if (!v.is_number()) {
        throw ValidationError(path, "expected a number");
    }
    return v.get<double>();
}

bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) {
        throw ValidationError(path, "expected a boolean");
    }
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) {
        throw ValidationError(path, "expected a string");
    }
    return v.get<std::string>();
}

Rational as_rational(const json& v, const std::string& path) {
    if (v.is_number_integer()) {
        return Rational{as_int(v, path)};
    }
    if (v.is_string()) {
        try {
            return parse_rational(v.get<std::string>());
        } catch (const std::exception& e) {
            throw ValidationError(path, std::string("bad rational: ") + e.what());
        }
    }
    throw ValidationError(path, "expected an integer or a rational string such as \"1/2\"");
}

Money as_money(const json& v, const std::string& path) { return Money{as_int(v, path)}; }

const json& as_array(const json& v, const std::string& path) {
    if (!v.is_array()) {
        throw ValidationError(path, "expected an array");
    }
    return v;
}

template <class T, class F>
void opt(const Obj& o, std::string_view key, T& out, F parse) {
    if (const json* v = o.find(key)) {
        out = parse(*v, o.path(key));
    }
}

sim::Distribution parse_distribution(const json& v, const std::string& path) {
    const Obj probe(v, path, {"kind", "value", "lo", "hi", "rate"});
    const std::string kind = as_string(probe.require("kind"), probe.path("kind"));
    if (kind == "constant") {
        const Obj o(v, path, {"kind", "value"});
        return sim::dist::Constant{as_double(o.require("value"), o.path("value"))};
    }
    if (kind == "uniform") {
        const Obj o(v, path, {"kind", "lo", "hi"});
        return sim::dist::Uniform{as_double(o.require("lo"), o.path("lo")), as_double(o.require("hi"), o.path("hi"))};
    }
    if (kind == "uniform_int") {
        const Obj o(v, path, {"kind", "lo", "hi"});
        return sim::dist::UniformInt{as_int(o.require("lo"), o.path("lo")), as_int(o.require("hi"), o.path("hi"))};
    }
    if (kind == "exponential") {
        const Obj o(v, path, {"kind", "rate"});
        return sim::dist::Exponential{as_double(o.require("rate"), o.path("rate"))};
    }
    throw ValidationError(probe.path("kind"), "unknown distribution kind '" + kind + "'");
}

Interval parse_interval(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) {
        throw ValidationError(path, "expected [begin, end]");
    }
    return {as_int(v[0], index(path, 0)), as_int(v[1], index(path, 1))};
}

allocator::PricingPolicy parse_pricing(const json& v, const std::string& path) {
    const Obj probe(v, path, {"kind", "rate", "base_rate", "peak_multiplier", "peak_windows", "alpha"});
    const std::string kind = as_string(probe.require("kind"), probe.path("kind"));
    if (kind == "fixed") {
        const Obj o(v, path, {"kind", "rate"});
        return allocator::pricing::Fixed{as_money(o.require("rate"), o.path("rate"))};
    }
    if (kind == "peak_off_peak") {
        const Obj o(v, path, {"kind", "base_rate", "peak_multiplier", "peak_windows"});
        allocator::pricing::PeakOffPeak p;
        p.base_rate = as_money(o.require("base_rate"), o.path("base_rate"));
        p.peak_multiplier = as_rational(o.require("peak_multiplier"), o.path("peak_multiplier"));
        const auto wpath = o.path("peak_windows");
        const json& ws = as_array(o.require("peak_windows"), wpath);
        for (std::size_t i = 0; i < ws.size(); ++i) {
            p.peak_windows.push_back(parse_interval(ws[i], index(wpath, i)));
        }
        return p;
    }
    if (kind == "utilization_linear") {
        const Obj o(v, path, {"kind", "base_rate", "alpha"});
        return allocator::pricing::UtilizationLinear{as_money(o.require("base_rate"), o.path("base_rate")),
                                                     as_rational(o.require("alpha"), o.path("alpha"))};
    }
    throw ValidationError(probe.path("kind"), "unknown pricing kind '" + kind + "'");
}

Money base_rate(const allocator::PricingPolicy& p) {
    return std::visit(
        [](const auto& x) -> Money {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, allocator::pricing::Fixed>) {
                return x.rate;
            } else {
                return x.base_rate;
            }
        },
        p);
}

exchange::MarketPricePolicy parse_market_price(const json& v, const std::string& path) {
    const Obj probe(v, path, {"kind", "base", "a", "b"});
    const std::string kind = as_string(probe.require("kind"), probe.path("kind"));
    if (kind == "fixed") {
        const Obj o(v, path, {"kind", "base"});
        return exchange::market_price::Fixed{as_money(o.require("base"), o.path("base"))};
    }
    if (kind == "variable") {
        const Obj o(v, path, {"kind", "base", "a", "b"});
        exchange::market_price::Variable p;
        p.base = as_money(o.require("base"), o.path("base"));
        opt(o, "a", p.a, as_rational);
        opt(o, "b", p.b, as_rational);
        return p;
    }
    throw ValidationError(probe.path("kind"), "unknown market price kind '" + kind + "'");
}

ProviderSpec parse_provider(const json& v, const std::string& path) {
    const Obj o(v, path,
                {"id", "name", "fleet", "reliability_class", "security_class", "pricing", "market_price", "cost_floor",
                 "initial_balance", "max_venues"});
    ProviderSpec p;
    p.id = ParticipantId{as_int(o.require("id"), o.path("id"))};
    p.name = "provider-" + std::to_string(p.id.value);
    opt(o, "name", p.name, as_string);
    const auto fpath = o.path("fleet");
    const json& fleet = as_array(o.require("fleet"), fpath);
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        const auto gpath = index(fpath, i);
        const Obj g(fleet[i], gpath, {"count", "cpu_capacity", "mem_capacity"});
        datacenter::FleetGroup group;
        group.count = 1;
        opt(g, "count", group.count, as_int);
        group.spec.cpu_capacity = as_int(g.require("cpu_capacity"), g.path("cpu_capacity"));
        group.spec.mem_capacity = as_int(g.require("mem_capacity"), g.path("mem_capacity"));
        p.fleet.push_back(group);
    }
    opt(o, "reliability_class", p.reliability_class, as_int32);
    opt(o, "security_class", p.security_class, as_int32);
    p.pricing = parse_pricing(o.require("pricing"), o.path("pricing"));
    p.market_price = exchange::market_price::Fixed{base_rate(p.pricing)};
    opt(o, "market_price", p.market_price, parse_market_price);
    opt(o, "cost_floor", p.cost_floor, as_money);
    opt(o, "initial_balance", p.initial_balance, as_money);
    opt(o, "max_venues", p.max_venues, as_int);
    return p;
}

BrokerSpec parse_broker(const json& v, const std::string& path) {
    const Obj o(v, path, {"id", "name", "procurement", "initial_balance", "markup"});
    BrokerSpec b;
    b.id = ParticipantId{as_int(o.require("id"), o.path("id"))};
    b.name = "broker-" + std::to_string(b.id.value);
    opt(o, "name", b.name, as_string);
    if (const json* pv = o.find("procurement")) {
        const auto s = as_string(*pv, o.path("procurement"));
        if (s == "negotiation") {
            b.procurement = Procurement::Negotiation;
        } else if (s == "auction") {
            b.procurement = Procurement::Auction;
        } else {
            throw ValidationError(o.path("procurement"), "expected \"negotiation\" or \"auction\"");
        }
    }
    opt(o, "initial_balance", b.initial_balance, as_money);
    opt(o, "markup", b.markup, as_rational);
    return b;
}

ConsumerSpec parse_consumer(const json& v, const std::string& path) {
    const Obj o(v, path, {"id", "name", "initial_balance", "budget_constraint", "use_brokers", "broker_k"});
    ConsumerSpec c;
    c.id = ParticipantId{as_int(o.require("id"), o.path("id"))};
    c.name = "consumer-" + std::to_string(c.id.value);
    opt(o, "name", c.name, as_string);
    opt(o, "initial_balance", c.initial_balance, as_money);
    c.budget_constraint = c.initial_balance;
    opt(o, "budget_constraint", c.budget_constraint, as_money);
    opt(o, "use_brokers", c.use_brokers, as_bool);
    opt(o, "broker_k", c.broker_k, as_int);
    return c;
}

TraceRequest parse_trace_request(const json& v, const std::string& path) {
    const Obj o(v, path,
                {"submit_time", "consumer", "workload_volume", "cpu_need", "mem_need", "deadline", "budget",
                 "reliability_class", "security_class"});
    TraceRequest r;
    r.submit_time = as_int(o.require("submit_time"), o.path("submit_time"));
    r.consumer = ParticipantId{as_int(o.require("consumer"), o.path("consumer"))};
    r.workload_volume = as_int(o.require("workload_volume"), o.path("workload_volume"));
    r.cpu_need = as_int(o.require("cpu_need"), o.path("cpu_need"));
    opt(o, "mem_need", r.mem_need, as_int);
    r.deadline = as_int(o.require("deadline"), o.path("deadline"));
    r.budget = as_money(o.require("budget"), o.path("budget"));
    opt(o, "reliability_class", r.reliability_class, as_int32);
    opt(o, "security_class", r.security_class, as_int32);
    return r;
}

ArrivalProcess parse_arrival(const json& v, const std::string& path) {
    const Obj probe(v, path, {"kind", "rate", "requests"});
    const std::string kind = as_string(probe.require("kind"), probe.path("kind"));
    if (kind == "poisson") {
        const Obj o(v, path, {"kind", "rate"});
        return PoissonArrival{as_rational(o.require("rate"), o.path("rate"))};
    }
    if (kind == "trace") {
        const Obj o(v, path, {"kind", "requests"});
        TraceArrival t;
        const auto rpath = o.path("requests");
        const json& rs = as_array(o.require("requests"), rpath);
        for (std::size_t i = 0; i < rs.size(); ++i) {
            t.requests.push_back(parse_trace_request(rs[i], index(rpath, i)));
        }
        return t;
    }
    throw ValidationError(probe.path("kind"), "unknown arrival kind '" + kind + "'");
}

QosClass parse_class(const json& v, const std::string& path) {
    const Obj o(v, path, {"name", "weight", "slack", "budget_factor", "reliability_class", "security_class"});
    QosClass c;
    c.name = as_string(o.require("name"), o.path("name"));
    opt(o, "weight", c.weight, as_rational);
    opt(o, "slack", c.slack, as_rational);
    opt(o, "budget_factor", c.budget_factor, as_rational);
    opt(o, "reliability_class", c.reliability_class, as_int32);
    opt(o, "security_class", c.security_class, as_int32);
    return c;
}

WorkloadSpec parse_workload(const json& v, const std::string& path) {
    const Obj o(v, path,
                {"arrival", "demand_scale", "volume", "cpu_need", "mem_need", "classes", "reference_rate"});
    WorkloadSpec w;
    w.arrival = parse_arrival(o.require("arrival"), o.path("arrival"));
    opt(o, "demand_scale", w.demand_scale, as_rational);
    opt(o, "volume", w.volume, parse_distribution);
    opt(o, "cpu_need", w.cpu_need, parse_distribution);
    opt(o, "mem_need", w.mem_need, parse_distribution);
    if (const json* cs = o.find("classes")) {
        const auto cpath = o.path("classes");
        as_array(*cs, cpath);
        w.classes.clear();
        for (std::size_t i = 0; i < cs->size(); ++i) {
            w.classes.push_back(parse_class((*cs)[i], index(cpath, i)));
        }
    }
    opt(o, "reference_rate", w.reference_rate, as_money);
    return w;
}

ExchangeSpec parse_exchange(const json& v, const std::string& path) {
    const Obj o(v, path, {"auction_period", "ask_lookahead", "fee_rate", "penalty_rate", "negotiation", "risk"});
    ExchangeSpec e;
    opt(o, "auction_period", e.auction_period, as_int);
    opt(o, "ask_lookahead", e.ask_lookahead, as_int);
    opt(o, "fee_rate", e.fee_rate, as_rational);
    opt(o, "penalty_rate", e.penalty_rate, as_money);
    if (const json* nv = o.find("negotiation")) {
        const Obj n(*nv, o.path("negotiation"), {"max_rounds", "exponent", "first_mover", "buyer_open", "seller_markup"});
        opt(n, "max_rounds", e.negotiation.max_rounds, as_int);
        opt(n, "exponent", e.negotiation.exponent, as_int32);
        if (const json* fm = n.find("first_mover")) {
            const auto s = as_string(*fm, n.path("first_mover"));
            if (s == "buyer") {
                e.negotiation.first_mover = negotiation::Role::Buyer;
            } else if (s == "seller") {
                e.negotiation.first_mover = negotiation::Role::Seller;
            } else {
                throw ValidationError(n.path("first_mover"), "expected \"buyer\" or \"seller\"");
            }
        }
        opt(n, "buyer_open", e.negotiation.buyer_open, as_rational);
        opt(n, "seller_markup", e.negotiation.seller_markup, as_rational);
    }
    if (const json* rv = o.find("risk")) {
        const Obj r(*rv, o.path("risk"), {"lateness_probability", "expected_lateness"});
        if (const json* lp = r.find("lateness_probability")) {
            const auto lpath = r.path("lateness_probability");
            if (!lp->is_object()) {
                throw ValidationError(lpath, "expected an object keyed by reliability class");
            }
            for (const auto& [key, value] : lp->items()) {
                const auto kpath = child(lpath, key);
                std::int32_t cls = 0;
                try {
                    std::size_t used = 0;
                    cls = std::stoi(key, &used);
                    if (used != key.size()) {
                        throw std::invalid_argument(key);
                    }
                } catch (const std::exception&) {
                    throw ValidationError(kpath, "reliability class key must be an integer");
                }
                e.risk.lateness_probability[cls] = as_rational(value, kpath);
            }
        }
        opt(r, "expected_lateness", e.risk.expected_lateness, as_int);
    }
    return e;
}

Scenario parse(const json& doc) {
    const Obj o(doc, "",
                {"format_version", "master_seed", "horizon", "drain", "mode", "datacenter", "providers", "brokers",
                 "consumers", "workload", "exchange", "baseline", "admission"});
    Scenario s;
    s.format_version = as_int(o.require("format_version"), "format_version");
    if (s.format_version != kFormatVersion) {
        throw ValidationError("format_version", "unsupported version (expected " + std::to_string(kFormatVersion) + ")");
    }
    opt(o, "master_seed", s.master_seed, as_uint);
    s.horizon = as_int(o.require("horizon"), "horizon");
    opt(o, "drain", s.drain, as_bool);
    if (const json* mv = o.find("mode")) {
        const auto m = as_string(*mv, "mode");
        if (m == "market") {
            s.mode = Mode::Market;
        } else if (m == "baseline") {
            s.mode = Mode::Baseline;
        } else {
            throw ValidationError("mode", "expected \"market\" or \"baseline\"");
        }
    }
    if (const json* dv = o.find("datacenter")) {
        const Obj d(*dv, "datacenter", {"boot_delay", "placement"});
        opt(d, "boot_delay", s.datacenter.boot_delay, as_int);
        if (const json* pv = d.find("placement")) {
            const auto name = as_string(*pv, d.path("placement"));
            const auto p = datacenter::placement_from_string(name);
            if (!p) {
                throw ValidationError(d.path("placement"), "expected worst_fit, best_fit or first_fit");
            }
            s.datacenter.placement = *p;
        }
    }
    const json& providers = as_array(o.require("providers"), "providers");
    for (std::size_t i = 0; i < providers.size(); ++i) {
        s.providers.push_back(parse_provider(providers[i], index("providers", i)));
    }
    if (const json* bv = o.find("brokers")) {
        as_array(*bv, "brokers");
        for (std::size_t i = 0; i < bv->size(); ++i) {
            s.brokers.push_back(parse_broker((*bv)[i], index("brokers", i)));
        }
    }
    const json& consumers = as_array(o.require("consumers"), "consumers");
    for (std::size_t i = 0; i < consumers.size(); ++i) {
        s.consumers.push_back(parse_consumer(consumers[i], index("consumers", i)));
    }
    s.workload = parse_workload(o.require("workload"), "workload");
    if (const json* ev = o.find("exchange")) {
        s.exchange = parse_exchange(*ev, "exchange");
    }
    s.baseline.fixed_rate = s.workload.reference_rate;
    if (const json* bv = o.find("baseline")) {
        const Obj b(*bv, "baseline", {"fixed_rate"});
        opt(b, "fixed_rate", s.baseline.fixed_rate, as_money);
    }
    if (const json* av = o.find("admission")) {
        const Obj a(*av, "admission", {"history_window"});
        opt(a, "history_window", s.admission.history_window, as_int);
    }
    return s;
}

void check(bool ok, const std::string& field, const std::string& rule) {
    if (!ok) {
        throw ValidationError(field, rule);
    }
}

void check_distribution(const sim::Distribution& d, const std::string& path) {
    try {
        sim::validate(d);
    } catch (const std::exception& e) {
        throw ValidationError(path, e.what());
    }
    const bool nonnegative = std::visit(
        [](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, sim::dist::Constant>) {
                return x.value >= 0;
            } else if constexpr (std::is_same_v<T, sim::dist::Exponential>) {
                return true;
            } else {
                return x.lo >= 0;
            }
        },
        d);
    check(nonnegative, path, "distribution must not produce negative values");
}

} // namespace

void validate(const Scenario& s) {
    check(s.format_version == kFormatVersion, "format_version", "unsupported version");
    check(s.horizon > 0, "horizon", "must be > 0");
    check(s.datacenter.boot_delay >= 0, "datacenter.boot_delay", "must be >= 0");
    check(!s.providers.empty(), "providers", "at least one provider is required");
    check(!s.consumers.empty(), "consumers", "at least one consumer is required");

    std::set<ParticipantId> ids;
    std::set<ParticipantId> consumer_ids;
    auto unique_id = [&](ParticipantId id, const std::string& path) {
        check(id.value >= 0, path, "must be >= 0");
        check(ids.insert(id).second, path, "duplicate participant id " + std::to_string(id.value));
    };

    for (std::size_t i = 0; i < s.providers.size(); ++i) {
        const auto& p = s.providers[i];
        const auto path = index("providers", i);
        unique_id(p.id, path + ".id");
        check(!p.fleet.empty(), path + ".fleet", "at least one machine group is required");
        for (std::size_t g = 0; g < p.fleet.size(); ++g) {
            const auto gpath = index(path + ".fleet", g);
            check(p.fleet[g].count > 0, gpath + ".count", "must be > 0");
            check(p.fleet[g].spec.cpu_capacity > 0, gpath + ".cpu_capacity", "must be > 0");
            check(p.fleet[g].spec.mem_capacity >= 0, gpath + ".mem_capacity", "must be >= 0");
        }
        check(p.reliability_class >= 0, path + ".reliability_class", "must be >= 0");
        check(p.security_class >= 0, path + ".security_class", "must be >= 0");
        try {
            allocator::validate(p.pricing);
        } catch (const InvalidPolicy& e) {
            throw ValidationError(path + ".pricing", e.what());
        }
        try {
            exchange::validate(p.market_price);
        } catch (const InvalidPolicy& e) {
            throw ValidationError(path + ".market_price", e.what());
        }
        check(p.cost_floor >= Money{0}, path + ".cost_floor", "must be >= 0");
        check(p.initial_balance >= Money{0}, path + ".initial_balance", "must be >= 0");
        check(p.max_venues >= 0, path + ".max_venues", "must be >= 0");
    }
    for (std::size_t i = 0; i < s.brokers.size(); ++i) {
        const auto& b = s.brokers[i];
        const auto path = index("brokers", i);
        unique_id(b.id, path + ".id");
        check(b.initial_balance >= Money{0}, path + ".initial_balance", "must be >= 0");
        check(b.markup >= 0, path + ".markup", "must be >= 0");
    }
    for (std::size_t i = 0; i < s.consumers.size(); ++i) {
        const auto& c = s.consumers[i];
        const auto path = index("consumers", i);
        unique_id(c.id, path + ".id");
        consumer_ids.insert(c.id);
        check(c.initial_balance >= Money{0}, path + ".initial_balance", "must be >= 0");
        check(c.budget_constraint >= Money{0}, path + ".budget_constraint", "must be >= 0");
        check(c.broker_k >= 1, path + ".broker_k", "must be >= 1");
    }

    const auto& w = s.workload;
    if (const auto* p = std::get_if<PoissonArrival>(&w.arrival)) {
        check(p->rate > 0, "workload.arrival.rate", "must be > 0");
    } else {
        const auto& reqs = std::get<TraceArrival>(w.arrival).requests;
        for (std::size_t i = 0; i < reqs.size(); ++i) {
            const auto& r = reqs[i];
            const auto path = index("workload.arrival.requests", i);
            check(r.submit_time >= 0 && r.submit_time < s.horizon, path + ".submit_time", "must lie in [0, horizon)");
            check(consumer_ids.contains(r.consumer), path + ".consumer",
                  "unknown consumer id " + std::to_string(r.consumer.value));
            check(r.workload_volume > 0, path + ".workload_volume", "must be > 0");
            check(r.cpu_need > 0, path + ".cpu_need", "must be > 0");
            check(r.mem_need >= 0, path + ".mem_need", "must be >= 0");
            check(r.deadline > r.submit_time, path + ".deadline", "must be after submit_time");
            check(r.budget >= Money{0}, path + ".budget", "must be >= 0");
        }
    }
    check(w.demand_scale > 0, "workload.demand_scale", "must be > 0");
    check_distribution(w.volume, "workload.volume");
    check_distribution(w.cpu_need, "workload.cpu_need");
    check_distribution(w.mem_need, "workload.mem_need");
    check(!w.classes.empty(), "workload.classes", "at least one class is required");
    Rational weights{0};
    for (std::size_t i = 0; i < w.classes.size(); ++i) {
        const auto& c = w.classes[i];
        const auto path = index("workload.classes", i);
        check(c.weight >= 0, path + ".weight", "must be >= 0");
        check(c.slack > 0, path + ".slack", "must be > 0");
        check(c.budget_factor >= 0, path + ".budget_factor", "must be >= 0");
        weights += c.weight;
    }
    check(weights == Rational{1}, "workload.classes", "weights must sum to 1");
    check(w.reference_rate >= Money{0}, "workload.reference_rate", "must be >= 0");

    const auto& e = s.exchange;
    check(e.auction_period > 0, "exchange.auction_period", "must be > 0");
    check(e.ask_lookahead > 0, "exchange.ask_lookahead", "must be > 0");
    check(e.fee_rate >= 0 && e.fee_rate <= 1, "exchange.fee_rate", "must lie in [0, 1]");
    check(e.penalty_rate >= Money{0}, "exchange.penalty_rate", "must be >= 0");
    check(e.negotiation.max_rounds >= 0, "exchange.negotiation.max_rounds", "must be >= 0");
    check(e.negotiation.exponent >= 1 && e.negotiation.exponent <= 16, "exchange.negotiation.exponent",
          "must lie in [1, 16]");
    check(e.negotiation.buyer_open >= 0 && e.negotiation.buyer_open <= 1, "exchange.negotiation.buyer_open",
          "must lie in [0, 1]");
    check(e.negotiation.seller_markup >= 1, "exchange.negotiation.seller_markup", "must be >= 1");
    for (const auto& [cls, p] : e.risk.lateness_probability) {
        check(p >= 0 && p <= 1, "exchange.risk.lateness_probability." + std::to_string(cls), "must lie in [0, 1]");
    }
    check(e.risk.expected_lateness >= 0, "exchange.risk.expected_lateness", "must be >= 0");
    check(s.baseline.fixed_rate >= Money{0}, "baseline.fixed_rate", "must be >= 0");
    check(s.admission.history_window >= 0, "admission.history_window", "must be >= 0");
}

Scenario load_scenario(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document.begin(), document.end());
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), e.byte);
    }
    Scenario s = parse(doc);
    validate(s);
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read scenario file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str());
}

namespace {

ordered_json emit_rational(Rational r) { return mocsim::to_string(r); }

ordered_json emit_distribution(const sim::Distribution& d) {
    return std::visit(
        [](const auto& x) -> ordered_json {
            using T = std::decay_t<decltype(x)>;
            ordered_json o;
            if constexpr (std::is_same_v<T, sim::dist::Constant>) {
                o["kind"] = "constant";
                o["value"] = x.value;
            } else if constexpr (std::is_same_v<T, sim::dist::Uniform>) {
                o["kind"] = "uniform";
                o["lo"] = x.lo;
                o["hi"] = x.hi;
            } else if constexpr (std::is_same_v<T, sim::dist::UniformInt>) {
                o["kind"] = "uniform_int";
                o["lo"] = x.lo;
                o["hi"] = x.hi;
            } else {
                o["kind"] = "exponential";
                o["rate"] = x.rate;
            }
            return o;
        },
        d);
}

ordered_json emit_pricing(const allocator::PricingPolicy& p) {
    return std::visit(
        [](const auto& x) -> ordered_json {
            using T = std::decay_t<decltype(x)>;
            ordered_json o;
            if constexpr (std::is_same_v<T, allocator::pricing::Fixed>) {
                o["kind"] = "fixed";
                o["rate"] = x.rate.micros();
            } else if constexpr (std::is_same_v<T, allocator::pricing::PeakOffPeak>) {
                o["kind"] = "peak_off_peak";
                o["base_rate"] = x.base_rate.micros();
                o["peak_multiplier"] = emit_rational(x.peak_multiplier);
                o["peak_windows"] = ordered_json::array();
                for (const auto& w : x.peak_windows) {
                    o["peak_windows"].push_back({w.begin, w.end});
                }
            } else {
                o["kind"] = "utilization_linear";
                o["base_rate"] = x.base_rate.micros();
                o["alpha"] = emit_rational(x.alpha);
            }
            return o;
        },
        p);
}

ordered_json emit_market_price(const exchange::MarketPricePolicy& p) {
    return std::visit(
        [](const auto& x) -> ordered_json {
            using T = std::decay_t<decltype(x)>;
            ordered_json o;
            if constexpr (std::is_same_v<T, exchange::market_price::Fixed>) {
                o["kind"] = "fixed";
                o["base"] = x.base.micros();
            } else {
                o["kind"] = "variable";
                o["base"] = x.base.micros();
                o["a"] = emit_rational(x.a);
                o["b"] = emit_rational(x.b);
            }
            return o;
        },
        p);
}

ordered_json to_json(const Scenario& s) {
    ordered_json j;
    j["format_version"] = s.format_version;
    j["master_seed"] = s.master_seed;
    j["horizon"] = s.horizon;
    j["drain"] = s.drain;
    j["mode"] = to_string(s.mode);
    j["datacenter"] = {{"boot_delay", s.datacenter.boot_delay},
                       {"placement", datacenter::to_string(s.datacenter.placement)}};
    j["providers"] = ordered_json::array();
    for (const auto& p : s.providers) {
        ordered_json o;
        o["id"] = p.id.value;
        o["name"] = p.name;
        o["fleet"] = ordered_json::array();
        for (const auto& g : p.fleet) {
            o["fleet"].push_back(
                {{"count", g.count}, {"cpu_capacity", g.spec.cpu_capacity}, {"mem_capacity", g.spec.mem_capacity}});
        }
        o["reliability_class"] = p.reliability_class;
        o["security_class"] = p.security_class;
        o["pricing"] = emit_pricing(p.pricing);
        o["market_price"] = emit_market_price(p.market_price);
        o["cost_floor"] = p.cost_floor.micros();
        o["initial_balance"] = p.initial_balance.micros();
        o["max_venues"] = p.max_venues;
        j["providers"].push_back(o);
    }
    j["brokers"] = ordered_json::array();
    for (const auto& b : s.brokers) {
        ordered_json o;
        o["id"] = b.id.value;
        o["name"] = b.name;
        o["procurement"] = to_string(b.procurement);
        o["initial_balance"] = b.initial_balance.micros();
        o["markup"] = emit_rational(b.markup);
        j["brokers"].push_back(o);
    }
    j["consumers"] = ordered_json::array();
    for (const auto& c : s.consumers) {
        ordered_json o;
        o["id"] = c.id.value;
        o["name"] = c.name;
        o["initial_balance"] = c.initial_balance.micros();
        o["budget_constraint"] = c.budget_constraint.micros();
        o["use_brokers"] = c.use_brokers;
        o["broker_k"] = c.broker_k;
        j["consumers"].push_back(o);
    }
    ordered_json w;
    if (const auto* p = std::get_if<PoissonArrival>(&s.workload.arrival)) {
        w["arrival"] = {{"kind", "poisson"}, {"rate", emit_rational(p->rate)}};
    } else {
        ordered_json reqs = ordered_json::array();
        for (const auto& r : std::get<TraceArrival>(s.workload.arrival).requests) {
            ordered_json o;
            o["submit_time"] = r.submit_time;
            o["consumer"] = r.consumer.value;
            o["workload_volume"] = r.workload_volume;
            o["cpu_need"] = r.cpu_need;
            o["mem_need"] = r.mem_need;
            o["deadline"] = r.deadline;
            o["budget"] = r.budget.micros();
            o["reliability_class"] = r.reliability_class;
            o["security_class"] = r.security_class;
            reqs.push_back(o);
        }
        w["arrival"] = {{"kind", "trace"}, {"requests", reqs}};
    }
    w["demand_scale"] = emit_rational(s.workload.demand_scale);
    w["volume"] = emit_distribution(s.workload.volume);
    w["cpu_need"] = emit_distribution(s.workload.cpu_need);
    w["mem_need"] = emit_distribution(s.workload.mem_need);
    w["classes"] = ordered_json::array();
    for (const auto& c : s.workload.classes) {
        ordered_json o;
        o["name"] = c.name;
        o["weight"] = emit_rational(c.weight);
        o["slack"] = emit_rational(c.slack);
        o["budget_factor"] = emit_rational(c.budget_factor);
        o["reliability_class"] = c.reliability_class;
        o["security_class"] = c.security_class;
        w["classes"].push_back(o);
    }
    w["reference_rate"] = s.workload.reference_rate.micros();
    j["workload"] = w;

    const auto& e = s.exchange;
    ordered_json lp = ordered_json::object();
    for (const auto& [cls, p] : e.risk.lateness_probability) {
        lp[std::to_string(cls)] = emit_rational(p);
    }
    j["exchange"] = {
        {"auction_period", e.auction_period},
        {"ask_lookahead", e.ask_lookahead},
        {"fee_rate", emit_rational(e.fee_rate)},
        {"penalty_rate", e.penalty_rate.micros()},
        {"negotiation",
         {{"max_rounds", e.negotiation.max_rounds},
          {"exponent", e.negotiation.exponent},
          {"first_mover", e.negotiation.first_mover == negotiation::Role::Buyer ? "buyer" : "seller"},
          {"buyer_open", emit_rational(e.negotiation.buyer_open)},
          {"seller_markup", emit_rational(e.negotiation.seller_markup)}}},
        {"risk", {{"lateness_probability", lp}, {"expected_lateness", e.risk.expected_lateness}}},
    };
    j["baseline"] = {{"fixed_rate", s.baseline.fixed_rate.micros()}};
    j["admission"] = {{"history_window", s.admission.history_window}};
    return j;
}

} // namespace

std::string emit_scenario(const Scenario& scenario) { return to_json(scenario).dump(2) + "\n"; }

std::string scenario_digest(const Scenario& scenario) { return hex64(fnv1a(emit_scenario(scenario))); }

} // namespace mocsim::workload
