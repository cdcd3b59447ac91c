#pragma once

#include <mocsim/allocator/pricing.hpp>
#include <mocsim/datacenter/datacenter.hpp>
#include <mocsim/exchange/agents.hpp>
#include <mocsim/negotiation/negotiation.hpp>
#include <mocsim/sim/rng.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mocsim::workload {

inline constexpr std::int64_t kFormatVersion = 1;

enum class Mode : std::uint8_t { Market, Baseline };

[[nodiscard]] std::string_view to_string(Mode m) noexcept;

struct DatacenterSpec {
    SimTime boot_delay = 0;
    datacenter::PlacementPolicy placement = datacenter::PlacementPolicy::WorstFit;

    friend bool operator==(const DatacenterSpec&, const DatacenterSpec&) = default;
};

struct ProviderSpec {
    ParticipantId id;
    std::string name;
    std::vector<datacenter::FleetGroup> fleet;
    std::int32_t reliability_class = 0;
    std::int32_t security_class = 0;
    allocator::PricingPolicy pricing;
    exchange::MarketPricePolicy market_price;
    Money cost_floor; ///< per cu-tick
    Money initial_balance;
    std::int64_t max_venues = 8;

    [[nodiscard]] std::int64_t total_cpu() const noexcept;

    friend bool operator==(const ProviderSpec&, const ProviderSpec&) = default;
};

enum class Procurement : std::uint8_t { Negotiation, Auction };

[[nodiscard]] std::string_view to_string(Procurement p) noexcept;

struct BrokerSpec {
    ParticipantId id;
    std::string name;
    Procurement procurement = Procurement::Negotiation;
    Money initial_balance;
    Rational markup{1, 10}; ///< consumer price = procurement price * (1 + markup), capped by budget

    friend bool operator==(const BrokerSpec&, const BrokerSpec&) = default;
};

struct ConsumerSpec {
    ParticipantId id;
    std::string name;
    Money initial_balance;
    Money budget_constraint; ///< cap on simultaneously outstanding committed spend
    bool use_brokers = false;
    std::int64_t broker_k = 1;

    friend bool operator==(const ConsumerSpec&, const ConsumerSpec&) = default;
};

/// One request of a fixed trace, written out in full.
struct TraceRequest {
    SimTime submit_time = 0;
    ParticipantId consumer;
    std::int64_t workload_volume = 0;
    std::int64_t cpu_need = 0;
    std::int64_t mem_need = 0;
    SimTime deadline = 0;
    Money budget;
    std::int32_t reliability_class = 0;
    std::int32_t security_class = 0;

    friend bool operator==(const TraceRequest&, const TraceRequest&) = default;
};

struct PoissonArrival {
    Rational rate; ///< arrivals per tick, before demand scaling

    friend bool operator==(const PoissonArrival&, const PoissonArrival&) = default;
};

struct TraceArrival {
    std::vector<TraceRequest> requests;

    friend bool operator==(const TraceArrival&, const TraceArrival&) = default;
};

using ArrivalProcess = std::variant<PoissonArrival, TraceArrival>;

/// QoS class of generated requests: deadline slack and budget factor.
struct QosClass {
    std::string name;
    Rational weight{1};
    Rational slack{2};         ///< deadline = submit + ceil(slack * minimal runtime)
    Rational budget_factor{2}; ///< budget = ceil(budget_factor * reference_rate * volume)
    std::int32_t reliability_class = 0;
    std::int32_t security_class = 0;

    friend bool operator==(const QosClass&, const QosClass&) = default;
};

struct WorkloadSpec {
    ArrivalProcess arrival = PoissonArrival{Rational{1, 10}};
    Rational demand_scale{1}; ///< multiplies the Poisson rate
    sim::Distribution volume = sim::dist::Constant{100};
    sim::Distribution cpu_need = sim::dist::Constant{1};
    sim::Distribution mem_need = sim::dist::Constant{0};
    std::vector<QosClass> classes{QosClass{"default"}};
    Money reference_rate{100}; ///< per cu-tick

    friend bool operator==(const WorkloadSpec&, const WorkloadSpec&) = default;
};

struct NegotiationSpec {
    std::int64_t max_rounds = 8;
    std::int32_t exponent = 1;
    negotiation::Role first_mover = negotiation::Role::Buyer;
    Rational buyer_open{1, 2};    ///< buyer opens at this fraction of its reservation
    Rational seller_markup{3, 2}; ///< seller opens at this multiple of its reservation

    friend bool operator==(const NegotiationSpec&, const NegotiationSpec&) = default;
};

struct RiskSpec {
    std::map<std::int32_t, Rational> lateness_probability; ///< by reliability class
    SimTime expected_lateness = 0;

    friend bool operator==(const RiskSpec&, const RiskSpec&) = default;
};

struct ExchangeSpec {
    SimTime auction_period = 60;
    SimTime ask_lookahead = 3600;
    Rational fee_rate{0};
    Money penalty_rate{10}; ///< per tick of lateness
    NegotiationSpec negotiation;
    RiskSpec risk;

    friend bool operator==(const ExchangeSpec&, const ExchangeSpec&) = default;
};

struct BaselineSpec {
    Money fixed_rate{100}; ///< per cu-tick

    friend bool operator==(const BaselineSpec&, const BaselineSpec&) = default;
};

struct AdmissionSpec {
    SimTime history_window = 0;

    friend bool operator==(const AdmissionSpec&, const AdmissionSpec&) = default;
};

struct Scenario {
    std::int64_t format_version = kFormatVersion;
    std::uint64_t master_seed = 0;
    SimTime horizon = 0;
    bool drain = false; ///< keep running after the horizon until every job settles
    Mode mode = Mode::Market;
    DatacenterSpec datacenter;
    std::vector<ProviderSpec> providers;
    std::vector<BrokerSpec> brokers;
    std::vector<ConsumerSpec> consumers;
    WorkloadSpec workload;
    ExchangeSpec exchange;
    BaselineSpec baseline;
    AdmissionSpec admission;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Parse and validate a scenario document. Throws ParseError (with byte
/// offset) on malformed JSON and ValidationError (with field path) on the
/// first broken rule. Unknown keys are rejected.
[[nodiscard]] Scenario load_scenario(std::string_view document);

/// Read and load a file. Throws std::runtime_error naming the path when it
/// cannot be read.
[[nodiscard]] Scenario load_scenario_file(const std::string& path);

/// Throws ValidationError.
void validate(const Scenario& scenario);

/// Normalized document with every default written out; loads back to an equal Scenario.
[[nodiscard]] std::string emit_scenario(const Scenario& scenario);

/// FNV-1a of the normalized document, as 16 hex digits.
[[nodiscard]] std::string scenario_digest(const Scenario& scenario);

} // namespace mocsim::workload
