#include <mocsim/run/simulation.hpp>

#include <mocsim/allocator/allocator.hpp>
#include <mocsim/core/error.hpp>
#include <mocsim/core/hash.hpp>
#include <mocsim/datacenter/datacenter.hpp>
#include <mocsim/exchange/agents.hpp>
#include <mocsim/exchange/auction.hpp>
#include <mocsim/exchange/directory.hpp>
#include <mocsim/sim/engine.hpp>
#include <mocsim/sim/trace.hpp>
#include <mocsim/workload/generator.hpp>

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <sstream>

namespace mocsim::run {

namespace {

using allocator::ServiceRequest;
using exchange::ParticipantRole;
using sim::Event;
using sim::EventKind;
using workload::Mode;

constexpr std::int64_t kMaxRequeues = 1000;
constexpr std::uint64_t kPruneEvery = 256;

enum class Route : std::uint8_t { Direct, Negotiated, Auctioned };

struct ProviderState {
    const workload::ProviderSpec* spec = nullptr;
    AccountId account;
    std::unique_ptr<datacenter::Datacenter> dc;
    std::unique_ptr<allocator::Allocator> alloc;
    std::vector<std::int64_t> venues;
    Money posted;
    std::optional<OrderId> ask;

    [[nodiscard]] bool serves(std::int64_t venue) const {
        return std::find(venues.begin(), venues.end(), venue) != venues.end();
    }
};

struct BrokerState {
    const workload::BrokerSpec* spec = nullptr;
    AccountId account;
    Money committed; ///< unsettled provider SLAs
};

struct ConsumerState {
    const workload::ConsumerSpec* spec = nullptr;
    AccountId account;
    Money outstanding; ///< unsettled consumer SLAs
};

struct RequestState {
    Route route = Route::Direct;
    std::optional<SlaId> consumer_sla;
    std::int64_t unplaced = 0;
    std::int64_t pieces_open = 0;
    SimTime last_completion = 0;
    bool abandoned = false;
    bool closed = false;
    Money bid_unit;
    SimTime bid_expiry = 0;
    std::set<OrderId> bids;
};

struct JobState {
    std::size_t provider = 0;
    std::size_t request = 0;
    ServiceRequest job;
    allocator::VmPlan plan;
    SlaId sla;
    std::int64_t requeues = 0;
    bool auctioned = false;
};

class Simulation {
public:
    Simulation(const workload::Scenario& scenario, const RunOptions& options);
    RunResult execute();

private:
    // setup
    void open_accounts();
    void build_providers();
    void fund();

    // handlers
    void on_arrival(const Event& e);
    void on_round(const Event& e);
    void on_provision(const Event& e);
    void on_complete(const Event& e);

    // request routes
    void route_direct(std::size_t i, SimTime now);
    void route_baseline(std::size_t i, SimTime now);
    void route_brokered(std::size_t i, SimTime now);
    bool procure_negotiated(std::size_t i, std::size_t b, Money willingness, SimTime now);
    bool procure_auctioned(std::size_t i, std::size_t b, Money willingness, SimTime now);
    bool place_piece(std::size_t i, std::size_t b, std::size_t p, std::int64_t quantity, Money unit, SimTime now);
    void abandon(std::size_t i, SimTime now);
    void fail_request(std::size_t i, SimTime now);
    void reject(std::size_t i, metrics::RequestRejection reason);

    // market state
    void refresh_market(SimTime t);
    [[nodiscard]] std::vector<exchange::DirectoryListing> provider_listings(const ServiceRequest& r, SimTime now,
                                                                            std::optional<std::int64_t> venue) const;
    [[nodiscard]] std::int64_t procurable(const std::vector<exchange::DirectoryListing>& listings,
                                          Interval window) const;
    [[nodiscard]] exchange::RiskModel risk_model() const;

    // bookkeeping
    [[nodiscard]] Money effective_budget(const ServiceRequest& r) const;
    [[nodiscard]] Money available(const BrokerState& b) const;
    [[nodiscard]] ServiceRequest make_job(const ServiceRequest& r, std::int64_t volume, Money budget,
                                          ParticipantId buyer, SimTime now);
    SlaId form_sla(negotiation::Sla sla);
    void commit_job(std::size_t p, std::size_t i, const ServiceRequest& job, const allocator::Accept& accept,
                    SlaId sla, ParticipantId holder, bool auctioned);
    exchange::Settlement settle(SlaId id, std::optional<SimTime> completion, SimTime at,
                                std::optional<Money> charge = std::nullopt);
    void post(const exchange::LedgerEntry& entry);
    void submit_bid(std::size_t i, std::size_t b, std::int64_t quantity, SimTime now);

    [[nodiscard]] ConsumerState& consumer_of(const ServiceRequest& r) {
        return consumers_.at(consumer_index_.at(r.consumer));
    }
    [[nodiscard]] const ConsumerState& consumer_of(const ServiceRequest& r) const {
        return consumers_.at(consumer_index_.at(r.consumer));
    }

    workload::Scenario scenario_;
    std::uint64_t seed_;
    Mode mode_;
    std::vector<ServiceRequest> requests_;
    std::vector<RequestState> states_;

    sim::Engine engine_;
    sim::TraceWriter trace_;
    std::optional<metrics::Collector> collector_;

    exchange::Ledger ledger_;
    exchange::SettlementDesk desk_{ledger_};
    exchange::Directory directory_;
    exchange::CallAuction auction_;
    exchange::ReservationBook reservations_;
    AccountId exchange_account_;

    std::vector<ProviderState> providers_;
    std::vector<BrokerState> brokers_;
    std::vector<ConsumerState> consumers_;
    std::map<ParticipantId, std::size_t> provider_index_;
    std::map<ParticipantId, std::size_t> broker_index_;
    std::map<ParticipantId, std::size_t> consumer_index_;
    std::map<ParticipantId, AccountId> account_of_;
    std::map<ParticipantId, Money*> outstanding_of_;
    metrics::Roster roster_;

    std::map<RequestId, JobState> jobs_;
    std::map<SlaId, negotiation::Sla> sla_by_id_;
    std::map<OrderId, std::size_t> bid_request_;
    std::map<OrderId, std::size_t> bid_broker_;
    std::vector<negotiation::Sla> slas_;
    std::vector<exchange::Settlement> settlements_;
    std::vector<InvoiceRow> invoices_;
    std::vector<ClearingRow> clearing_;

    std::int64_t next_job_ = 0;
    std::int64_t next_sla_ = 0;
    std::int64_t next_session_ = 0;
    std::int64_t next_round_ = 0;
    std::uint64_t arrivals_ = 0;
};

Simulation::Simulation(const workload::Scenario& scenario, const RunOptions& options)
    : scenario_(scenario), seed_(options.seed.value_or(scenario.master_seed)),
      mode_(options.mode.value_or(scenario.mode)), trace_(options.trace_sink) {
    workload::validate(scenario_);
    requests_ = workload::generate_requests(scenario_, seed_);
    states_.resize(requests_.size());

    open_accounts();
    build_providers();
    collector_.emplace(roster_);

    engine_.add_observer([this](const Event& e) {
        trace_.write(e);
        collector_->record(e);
    });
    engine_.on(EventKind::RequestArrival, [this](const Event& e) { on_arrival(e); });
    engine_.on(EventKind::AuctionRound, [this](const Event& e) { on_round(e); });
    engine_.on(EventKind::VmProvision, [this](const Event& e) { on_provision(e); });
    engine_.on(EventKind::ExecutionComplete, [this](const Event& e) { on_complete(e); });

    fund();
    if (mode_ == Mode::Market) {
        engine_.schedule(EventKind::AuctionRound, {next_round_}, 0);
    }
    for (std::size_t i = 0; i < requests_.size(); ++i) {
        engine_.schedule(EventKind::RequestArrival, {requests_[i].id.value}, requests_[i].submit_time);
    }
}

void Simulation::open_accounts() {
    auto add = [&](ParticipantId id, ParticipantRole role, const std::string& name) {
        const AccountId account = ledger_.open_account(name);
        account_of_[id] = account;
        roster_.accounts[account] = metrics::Party{id, role, name};
        return account;
    };
    providers_.reserve(scenario_.providers.size());
    for (const auto& spec : scenario_.providers) {
        ProviderState p;
        p.spec = &spec;
        p.account = add(spec.id, ParticipantRole::Provider, spec.name);
        provider_index_[spec.id] = providers_.size();
        providers_.push_back(std::move(p));
        roster_.total_cpu += spec.total_cpu();
    }
    brokers_.reserve(scenario_.brokers.size());
    for (const auto& spec : scenario_.brokers) {
        BrokerState b;
        b.spec = &spec;
        b.account = add(spec.id, ParticipantRole::Broker, spec.name);
        broker_index_[spec.id] = brokers_.size();
        brokers_.push_back(b);
    }
    consumers_.reserve(scenario_.consumers.size());
    for (const auto& spec : scenario_.consumers) {
        ConsumerState c;
        c.spec = &spec;
        c.account = add(spec.id, ParticipantRole::Consumer, spec.name);
        consumer_index_[spec.id] = consumers_.size();
        consumers_.push_back(c);
    }
    for (auto& b : brokers_) {
        outstanding_of_[b.spec->id] = &b.committed;
    }
    for (auto& c : consumers_) {
        outstanding_of_[c.spec->id] = &c.outstanding;
    }
    exchange_account_ = ledger_.open_account("exchange");
}

void Simulation::build_providers() {
    const auto& dcs = scenario_.datacenter;
    const bool market = mode_ == Mode::Market;
    for (auto& p : providers_) {
        const auto& spec = *p.spec;
        auto machines = datacenter::expand_fleet(spec.fleet);
        p.dc = std::make_unique<datacenter::Datacenter>(engine_, spec.id.value, machines, dcs.boot_delay,
                                                         dcs.placement);
        allocator::PricingPolicy pricing =
            market ? spec.pricing : allocator::PricingPolicy{allocator::pricing::Fixed{scenario_.baseline.fixed_rate}};
        allocator::AdmissionController admission(std::move(machines), dcs.boot_delay, dcs.placement,
                                                 {spec.reliability_class, spec.security_class}, std::move(pricing),
                                                 market && scenario_.admission.history_window > 0);
        p.alloc = std::make_unique<allocator::Allocator>(std::move(admission), scenario_.admission.history_window,
                                                         &engine_, spec.id.value);
        p.posted = exchange::provider_set_price(spec.market_price, Rational{0}, Rational{0}, spec.cost_floor);
        reservations_.add_provider(spec.id, spec.total_cpu());
    }
}

void Simulation::fund() {
    auto credit = [&](AccountId account, Money amount) {
        if (amount > Money{0}) {
            post(ledger_.transfer(exchange::Ledger::kExternal, account, amount, exchange::TransferReason::Funding, 0));
        }
    };
    for (const auto& p : providers_) {
        credit(p.account, p.spec->initial_balance);
    }
    for (const auto& b : brokers_) {
        credit(b.account, b.spec->initial_balance);
    }
    for (const auto& c : consumers_) {
        credit(c.account, c.spec->initial_balance);
    }
}

void Simulation::post(const exchange::LedgerEntry& entry) {
    engine_.emit(EventKind::Transfer, {entry.from.value, entry.to.value, entry.amount.micros(),
                                       static_cast<std::int64_t>(entry.reason), entry.sla ? entry.sla->value : -1,
                                       static_cast<std::int64_t>(entry.index)});
}

Money Simulation::effective_budget(const ServiceRequest& r) const {
    const auto& c = consumer_of(r);
    const Money room = min(c.spec->budget_constraint - c.outstanding, ledger_.balance(c.account) - c.outstanding);
    return max(Money{0}, min(r.qos.budget, room));
}

Money Simulation::available(const BrokerState& b) const { return ledger_.balance(b.account) - b.committed; }

ServiceRequest Simulation::make_job(const ServiceRequest& r, std::int64_t volume, Money budget, ParticipantId buyer,
                                    SimTime now) {
    ServiceRequest job = r;
    job.id = RequestId{next_job_++};
    job.consumer = buyer;
    job.submit_time = now;
    job.workload_volume = volume;
    job.qos.budget = budget;
    return job;
}

SlaId Simulation::form_sla(negotiation::Sla sla) {
    sla.id = SlaId{next_sla_++};
    engine_.emit(EventKind::SlaFormed, {sla.id.value, sla.buyer.value, sla.seller.value, sla.price.micros(),
                                        sla.promised_completion, sla.penalty.rate.micros()});
    *outstanding_of_.at(sla.buyer) += sla.price;
    sla_by_id_[sla.id] = sla;
    slas_.push_back(sla);
    return sla.id;
}

void Simulation::commit_job(std::size_t p, std::size_t i, const ServiceRequest& job, const allocator::Accept& accept,
                            SlaId sla, ParticipantId holder, bool auctioned) {
    auto& prov = providers_[p];
    prov.alloc->commit(job, accept);
    const auto& plan = accept.vm_plan;
    const auto granted = reservations_.reserve(prov.spec->id, holder, plan.occupancy(), plan.entitlement.cpu, sla);
    engine_.emit(EventKind::ReservationGranted, {granted.id.value, granted.provider.value, granted.holder.value,
                                                 granted.window.begin, granted.window.end, granted.capacity});
    jobs_[job.id] = JobState{p, i, job, plan, sla, 0, auctioned};
    engine_.schedule(EventKind::VmProvision, {job.id.value, prov.spec->id.value}, plan.provision_at);
}

exchange::Settlement Simulation::settle(SlaId id, std::optional<SimTime> completion, SimTime at,
                                        std::optional<Money> charge) {
    const auto& sla = sla_by_id_.at(id);
    auto s = desk_.settle_sla(sla, account_of_.at(sla.buyer), account_of_.at(sla.seller), completion, at, charge);
    for (const auto& entry : s.entries) {
        post(entry);
    }
    engine_.emit(EventKind::SlaSettled, {id.value, s.payment.micros(), s.penalty.micros(),
                                         completion ? *completion : -1, sla.promised_completion});
    *outstanding_of_.at(sla.buyer) -= sla.price;
    settlements_.push_back(s);
    return s;
}

void Simulation::reject(std::size_t i, metrics::RequestRejection reason) {
    states_[i].closed = true;
    engine_.emit(EventKind::RequestRejected, {requests_[i].id.value, static_cast<std::int64_t>(reason)});
}

exchange::RiskModel Simulation::risk_model() const {
    const auto& risk = scenario_.exchange.risk;
    return {risk.lateness_probability, risk.expected_lateness, scenario_.exchange.penalty_rate};
}

std::vector<exchange::DirectoryListing> Simulation::provider_listings(const ServiceRequest& r, SimTime now,
                                                                      std::optional<std::int64_t> venue) const {
    exchange::DirectoryFilter filter;
    filter.at = now;
    filter.role = ParticipantRole::Provider;
    filter.min_reliability = r.qos.reliability_class;
    filter.min_security = r.qos.security_class;
    auto listings = directory_.query(filter);
    if (venue) {
        std::erase_if(listings, [&](const exchange::DirectoryListing& l) {
            return !providers_[provider_index_.at(l.participant)].serves(*venue);
        });
    }
    std::stable_sort(listings.begin(), listings.end(),
                     [](const auto& a, const auto& b) { return a.price_hint < b.price_hint; });
    return listings;
}

std::int64_t Simulation::procurable(const std::vector<exchange::DirectoryListing>& listings, Interval window) const {
    std::int64_t total = 0;
    for (const auto& l : listings) {
        total += providers_[provider_index_.at(l.participant)].alloc->admission().free_cpu_ticks(window);
    }
    return total;
}

void Simulation::on_arrival(const Event& e) {
    const auto i = static_cast<std::size_t>(e.payload[0]);
    const auto& r = requests_[i];
    const SimTime now = e.fire_at;
    engine_.emit(EventKind::RequestSubmitted, {r.id.value, r.consumer.value, r.workload_volume, r.qos.deadline,
                                               r.qos.budget.micros(), r.cpu_need});
    if (++arrivals_ % kPruneEvery == 0) {
        for (auto& p : providers_) {
            p.alloc->admission().prune_before(now);
        }
    }
    if (mode_ == Mode::Baseline) {
        route_baseline(i, now);
    } else if (consumer_of(r).spec->use_brokers) {
        route_brokered(i, now);
    } else {
        route_direct(i, now);
    }
}

void Simulation::route_direct(std::size_t i, SimTime now) {
    const auto& r = requests_[i];
    auto& consumer = consumer_of(r);
    const Money budget = effective_budget(r);
    std::optional<allocator::RejectReason> first_reason;
    for (const auto& listing : provider_listings(r, now, std::nullopt)) {
        const std::size_t p = provider_index_.at(listing.participant);
        auto& prov = providers_[p];
        const auto job = make_job(r, r.workload_volume, budget, consumer.spec->id, now);
        const auto decision = prov.alloc->examine(job, now, prov.dc->vm_monitor_snapshot(now), {}, r.id);
        if (!decision.accepted()) {
            first_reason = first_reason.value_or(decision.reason());
            continue;
        }
        const auto& a = decision.accept();
        const SlaId sla = form_sla({{}, consumer.spec->id, prov.spec->id, a.quoted_price, r.cpu_need,
                                    a.vm_plan.occupancy(), a.promised_completion,
                                    {scenario_.exchange.penalty_rate, a.quoted_price}});
        commit_job(p, i, job, a, sla, consumer.spec->id, false);
        states_[i].route = Route::Direct;
        states_[i].consumer_sla = sla;
        engine_.emit(EventKind::RequestAccepted, {r.id.value, prov.spec->id.value, a.quoted_price.micros(),
                                                  a.promised_completion, r.workload_volume, sla.value});
        return;
    }
    reject(i, static_cast<metrics::RequestRejection>(
                  first_reason.value_or(allocator::RejectReason::CapacityUnavailable)));
}

void Simulation::route_baseline(std::size_t i, SimTime now) {
    const auto& r = requests_[i];
    auto& consumer = consumer_of(r);
    const Money budget = effective_budget(r);
    const allocator::ExamineOptions fifo{std::nullopt, true};
    auto job = make_job(r, r.workload_volume, budget, consumer.spec->id, now);

    std::optional<std::size_t> best;
    SimTime best_completion = 0;
    for (std::size_t p = 0; p < providers_.size(); ++p) {
        auto& prov = providers_[p];
        const auto d = prov.alloc->admission().examine(job, now, prov.dc->vm_monitor_snapshot(now),
                                                       prov.alloc->load_stats(now), fifo);
        if (d.accepted() && (!best || d.accept().vm_plan.completion < best_completion)) {
            best = p;
            best_completion = d.accept().vm_plan.completion;
        }
    }
    const std::size_t p = best.value_or(0);
    auto& prov = providers_[p];
    const auto decision = prov.alloc->examine(job, now, prov.dc->vm_monitor_snapshot(now), fifo, r.id);
    if (!decision.accepted()) {
        if (best) {
            throw InvariantViolation("baseline choice for request " + std::to_string(r.id.value) + " changed");
        }
        reject(i, static_cast<metrics::RequestRejection>(decision.reason()));
        return;
    }
    const auto& a = decision.accept();
    const SlaId sla = form_sla({{}, consumer.spec->id, prov.spec->id, a.quoted_price, r.cpu_need,
                                a.vm_plan.occupancy(), a.promised_completion,
                                {scenario_.exchange.penalty_rate, a.quoted_price}});
    commit_job(p, i, job, a, sla, consumer.spec->id, false);
    states_[i].route = Route::Direct;
    states_[i].consumer_sla = sla;
    engine_.emit(EventKind::RequestAccepted, {r.id.value, prov.spec->id.value, a.quoted_price.micros(),
                                              a.promised_completion, r.workload_volume, sla.value});
}

void Simulation::route_brokered(std::size_t i, SimTime now) {
    const auto& r = requests_[i];
    const auto& consumer = consumer_of(r);
    const Money willingness = effective_budget(r);
    exchange::DirectoryFilter filter;
    filter.at = now;
    filter.role = ParticipantRole::Broker;
    const workload::ConsumerProxy proxy{consumer.spec->id, consumer.spec->budget_constraint, consumer.outstanding};
    std::vector<exchange::DirectoryListing> chosen;
    try {
        chosen = workload::proxy_select_brokers(proxy, directory_.query(filter), consumer.spec->broker_k,
                                                r.workload_volume);
    } catch (const NoBrokerAvailable&) {
        reject(i, metrics::RequestRejection::NoBrokerAvailable);
        return;
    }
    for (const auto& listing : chosen) {
        const std::size_t b = broker_index_.at(listing.participant);
        const bool placed = brokers_[b].spec->procurement == workload::Procurement::Negotiation
                                ? procure_negotiated(i, b, willingness, now)
                                : procure_auctioned(i, b, willingness, now);
        if (placed) {
            return;
        }
    }
    reject(i, metrics::RequestRejection::ProcurementFailed);
}

bool Simulation::procure_negotiated(std::size_t i, std::size_t b, Money willingness, SimTime now) {
    const auto& r = requests_[i];
    auto& broker = brokers_[b];
    const auto& bspec = *broker.spec;
    const auto& nspec = scenario_.exchange.negotiation;
    const Interval wanted{now, r.qos.deadline};

    const auto listings = provider_listings(r, now, bspec.id.value);
    const exchange::MarketView view{std::nullopt, listings, procurable(listings, wanted)};
    const auto decision = exchange::broker_decide({{r.id, willingness, r.workload_volume, r.qos.reliability_class}},
                                                  view, risk_model());
    if (decision.engaged.empty()) {
        return false;
    }
    const Money headroom = willingness - decision.engaged.front().expected_penalty;
    if (headroom <= Money{0}) {
        return false;
    }
    const Money limit = scale_floor(headroom, Rational{1} / (Rational{1} + bspec.markup));

    for (const auto& listing : listings) {
        const std::size_t p = provider_index_.at(listing.participant);
        auto& prov = providers_[p];
        auto job = make_job(r, r.workload_volume, limit, bspec.id, now);
        const auto snapshot = prov.dc->vm_monitor_snapshot(now);
        const auto pre = prov.alloc->admission().examine(job, now, snapshot, prov.alloc->load_stats(now));
        if (!pre.accepted()) {
            continue;
        }
        const auto& plan = pre.accept().vm_plan;
        const Money floor_total = max(pre.accept().quoted_price, prov.spec->cost_floor * r.workload_volume);
        if (floor_total > limit) {
            continue;
        }
        const negotiation::NegotiationTerms buyer{bspec.id,
                                                  negotiation::Role::Buyer,
                                                  limit,
                                                  scale(limit, nspec.buyer_open),
                                                  {nspec.exponent},
                                                  nspec.max_rounds,
                                                  wanted,
                                                  r.cpu_need};
        const negotiation::NegotiationTerms seller{prov.spec->id,
                                                   negotiation::Role::Seller,
                                                   floor_total,
                                                   max(floor_total, scale(floor_total, nspec.seller_markup)),
                                                   {nspec.exponent},
                                                   nspec.max_rounds,
                                                   plan.occupancy(),
                                                   r.cpu_need};
        auto session = negotiation::open_session(
            buyer, seller, nspec.first_mover,
            {SlaId{next_sla_}, scenario_.exchange.penalty_rate, next_session_++, &engine_});
        const auto outcome = session.run_to_completion();
        const auto* agreed = std::get_if<negotiation::Agreed>(&outcome);
        if (agreed == nullptr || available(broker) < agreed->sla.price) {
            continue;
        }
        const Money price = agreed->sla.price;
        const auto decision2 = prov.alloc->examine(job, now, snapshot, {price, false}, r.id);
        if (!decision2.accepted() || decision2.accept().vm_plan != plan) {
            throw InvariantViolation("negotiated job for request " + std::to_string(r.id.value) + " lost its plan");
        }
        const SlaId provider_sla = form_sla(agreed->sla);
        commit_job(p, i, job, decision2.accept(), provider_sla, bspec.id, false);

        const Money charge = min(willingness, scale(price, Rational{1} + bspec.markup));
        const auto& psla = sla_by_id_.at(provider_sla);
        const SlaId consumer_sla = form_sla({{}, r.consumer, bspec.id, charge, r.cpu_need, psla.window,
                                             psla.promised_completion, {scenario_.exchange.penalty_rate, charge}});
        auto& st = states_[i];
        st.route = Route::Negotiated;
        st.consumer_sla = consumer_sla;
        engine_.emit(EventKind::RequestAccepted, {r.id.value, bspec.id.value, charge.micros(),
                                                  psla.promised_completion, r.workload_volume, consumer_sla.value});
        return true;
    }
    return false;
}

bool Simulation::procure_auctioned(std::size_t i, std::size_t b, Money willingness, SimTime now) {
    const auto& r = requests_[i];
    const auto& bspec = *brokers_[b].spec;
    const Interval wanted{now, r.qos.deadline};

    const auto listings = provider_listings(r, now, exchange::kAuctionVenue);
    const exchange::MarketView view{auction_.last_clearing_price(), listings, procurable(listings, wanted)};
    const auto decision = exchange::broker_decide({{r.id, willingness, r.workload_volume, r.qos.reliability_class}},
                                                  view, risk_model());
    if (decision.engaged.empty()) {
        return false;
    }
    const Money headroom = willingness - decision.engaged.front().expected_penalty;
    if (headroom <= Money{0}) {
        return false;
    }
    const Money limit = scale_floor(headroom, Rational{1} / (Rational{1} + bspec.markup));
    const Money unit{limit.micros() / r.workload_volume};
    const SimTime expiry = r.qos.deadline - scenario_.datacenter.boot_delay - 1;
    if (unit <= Money{0} || expiry < now) {
        return false;
    }
    const Money charge = min(willingness, scale(unit * r.workload_volume, Rational{1} + bspec.markup));
    const SlaId sla = form_sla({{}, r.consumer, bspec.id, charge, r.cpu_need, wanted, r.qos.deadline,
                                {scenario_.exchange.penalty_rate, charge}});
    auto& st = states_[i];
    st.route = Route::Auctioned;
    st.consumer_sla = sla;
    st.unplaced = r.workload_volume;
    st.bid_unit = unit;
    st.bid_expiry = expiry;
    submit_bid(i, b, r.workload_volume, now);
    engine_.emit(EventKind::RequestAccepted,
                 {r.id.value, bspec.id.value, charge.micros(), r.qos.deadline, r.workload_volume, sla.value});
    return true;
}

void Simulation::submit_bid(std::size_t i, std::size_t b, std::int64_t quantity, SimTime now) {
    auto& st = states_[i];
    const auto& bspec = *brokers_[b].spec;
    exchange::Order order;
    order.side = exchange::Side::Bid;
    order.participant = bspec.id;
    order.unit_price = st.bid_unit;
    order.quantity = quantity;
    order.window = {now, requests_[i].qos.deadline};
    order.expiry = st.bid_expiry;
    const OrderId id = auction_.submit_bid(order, now);
    st.bids.insert(id);
    bid_request_[id] = i;
    bid_broker_[id] = b;
    engine_.emit(EventKind::OrderSubmitted,
                 {id.value, 0, bspec.id.value, order.unit_price.micros(), order.quantity, order.expiry});
}

bool Simulation::place_piece(std::size_t i, std::size_t b, std::size_t p, std::int64_t quantity, Money unit,
                             SimTime now) {
    const auto& r = requests_[i];
    auto& broker = brokers_[b];
    auto& prov = providers_[p];
    const Money price = unit * quantity;
    if (available(broker) < price) {
        return false;
    }
    const auto job = make_job(r, quantity, price, broker.spec->id, now);
    const auto decision = prov.alloc->examine(job, now, prov.dc->vm_monitor_snapshot(now), {price, false}, r.id);
    if (!decision.accepted()) {
        return false;
    }
    const auto& a = decision.accept();
    const SlaId sla = form_sla({{}, broker.spec->id, prov.spec->id, price, r.cpu_need, a.vm_plan.occupancy(),
                                a.promised_completion, {scenario_.exchange.penalty_rate, price}});
    commit_job(p, i, job, a, sla, broker.spec->id, true);
    auto& st = states_[i];
    st.unplaced -= quantity;
    ++st.pieces_open;
    return true;
}

void Simulation::abandon(std::size_t i, SimTime now) {
    auto& st = states_[i];
    if (st.abandoned || st.closed) {
        return;
    }
    st.abandoned = true;
    for (const OrderId id : st.bids) {
        auction_.cancel(id);
    }
    st.bids.clear();
    if (st.pieces_open == 0) {
        fail_request(i, now);
    }
}

void Simulation::fail_request(std::size_t i, SimTime now) {
    auto& st = states_[i];
    st.closed = true;
    settle(*st.consumer_sla, std::nullopt, now);
    engine_.emit(EventKind::RequestFailed,
                 {requests_[i].id.value, sla_by_id_.at(*st.consumer_sla).promised_completion});
}

void Simulation::refresh_market(SimTime t) {
    const auto& ex = scenario_.exchange;
    const Interval ahead{t, t + ex.ask_lookahead};
    std::int64_t bid_quantity = 0;
    for (const auto& [id, order] : auction_.book()) {
        if (order.side == exchange::Side::Bid) {
            bid_quantity += order.quantity;
        }
    }
    std::int64_t free_total = 0;
    for (const auto& p : providers_) {
        free_total += p.alloc->admission().free_cpu_ticks(ahead);
    }
    const Rational demand{bid_quantity, std::max<std::int64_t>(1, free_total)};
    const auto last = auction_.last_clearing_price();

    for (auto& p : providers_) {
        const auto& spec = *p.spec;
        const auto utilization = p.dc->vm_monitor_snapshot(t).cpu_utilization();
        p.posted = exchange::provider_set_price(spec.market_price, utilization, demand, spec.cost_floor);
        const std::int64_t free = p.alloc->admission().free_cpu_ticks(ahead);
        std::vector<exchange::VenueEstimate> estimates;
        estimates.push_back({exchange::kAuctionVenue, ((last ? *last : p.posted) - spec.cost_floor) * free});
        for (const auto& b : brokers_) {
            estimates.push_back({b.spec->id.value, (p.posted - spec.cost_floor) * free});
        }
        p.venues = exchange::provider_select_venues(estimates, spec.max_venues);
        directory_.register_listing({{}, spec.id, ParticipantRole::Provider, spec.total_cpu(), spec.reliability_class,
                                     spec.security_class, p.posted, ahead, t + ex.auction_period},
                                    t);
    }

    for (const auto& b : brokers_) {
        const auto& spec = *b.spec;
        const bool auction = spec.procurement == workload::Procurement::Auction;
        const std::int64_t venue = auction ? exchange::kAuctionVenue : spec.id.value;
        exchange::DirectoryFilter filter;
        filter.at = t;
        filter.role = ParticipantRole::Provider;
        auto listings = directory_.query(filter);
        std::erase_if(listings, [&](const exchange::DirectoryListing& l) {
            return !providers_[provider_index_.at(l.participant)].serves(venue);
        });
        const exchange::MarketView view{auction ? last : std::nullopt, listings, 0};
        const auto unit = exchange::procurement_unit_price(view);
        if (listings.empty() || !unit) {
            directory_.withdraw(spec.id, ParticipantRole::Broker);
            continue;
        }
        directory_.register_listing({{}, spec.id, ParticipantRole::Broker, 0, 0, 0,
                                     scale(*unit, Rational{1} + spec.markup), ahead, t + ex.auction_period},
                                    t);
    }
}

void Simulation::on_round(const Event& e) {
    const SimTime t = e.fire_at;
    const auto& ex = scenario_.exchange;
    const Interval ahead{t, t + ex.ask_lookahead};
    refresh_market(t);

    for (auto& p : providers_) {
        if (!p.serves(exchange::kAuctionVenue)) {
            continue;
        }
        const std::int64_t free = p.alloc->admission().free_cpu_ticks(ahead);
        if (free <= 0) {
            continue;
        }
        exchange::Order ask;
        ask.side = exchange::Side::Ask;
        ask.participant = p.spec->id;
        ask.unit_price = p.posted;
        ask.quantity = free;
        ask.window = ahead;
        ask.expiry = t;
        p.ask = auction_.submit_ask(ask, t);
        engine_.emit(EventKind::OrderSubmitted,
                     {p.ask->value, 1, p.spec->id.value, ask.unit_price.micros(), ask.quantity, ask.expiry});
    }

    const auto result = auction_.clear(t, ex.ask_lookahead);
    for (const OrderId id : result.expired) {
        engine_.emit(EventKind::OrderExpired, {id.value});
        if (const auto it = bid_request_.find(id); it != bid_request_.end()) {
            const std::size_t i = it->second;
            states_[i].bids.erase(id);
            bid_request_.erase(it);
            bid_broker_.erase(id);
            abandon(i, t);
        }
    }

    std::map<std::size_t, std::pair<std::size_t, std::int64_t>> unfilled; // request -> (broker, quantity)
    for (const auto& m : result.matches) {
        engine_.emit(EventKind::AuctionMatch, {m.bid.value, m.ask.value, m.quantity, m.clearing_price.micros()});
        clearing_.push_back({t, m.bid, m.ask, m.quantity, m.clearing_price});
        const std::size_t i = bid_request_.at(m.bid);
        const std::size_t b = bid_broker_.at(m.bid);
        const std::size_t p = provider_index_.at(m.seller);
        if (!place_piece(i, b, p, m.quantity, m.clearing_price, t)) {
            auto& slot = unfilled[i];
            slot.first = b;
            slot.second += m.quantity;
        }
    }

    for (auto& p : providers_) {
        if (p.ask) {
            auction_.cancel(*p.ask);
            p.ask.reset();
        }
    }
    for (auto it = bid_request_.begin(); it != bid_request_.end();) {
        if (!auction_.book().contains(it->first)) {
            states_[it->second].bids.erase(it->first);
            bid_broker_.erase(it->first);
            it = bid_request_.erase(it);
        } else {
            ++it;
        }
    }
    for (const auto& [i, slot] : unfilled) {
        if (states_[i].abandoned) {
            continue;
        }
        if (t + ex.auction_period <= states_[i].bid_expiry) {
            submit_bid(i, slot.first, slot.second, t);
        } else {
            abandon(i, t);
        }
    }

    engine_.emit(EventKind::AuctionCleared,
                 {e.payload[0], static_cast<std::int64_t>(result.matches.size()), result.traded(),
                  result.clearing_price ? result.clearing_price->micros() : -1});

    const SimTime next = t + ex.auction_period;
    if (next <= scenario_.horizon || (scenario_.drain && !auction_.book().empty())) {
        engine_.schedule(EventKind::AuctionRound, {++next_round_}, next);
    }
}

void Simulation::on_provision(const Event& e) {
    const SimTime t = e.fire_at;
    auto& job = jobs_.at(RequestId{e.payload[0]});
    auto& prov = providers_[job.provider];
    VmId vm;
    try {
        vm = prov.dc->provision_vm(job.plan.machine, job.plan.entitlement, t);
    } catch (const InsufficientCapacity&) {
        // A VM finishing at this tick has not been released yet.
        if (++job.requeues > kMaxRequeues || engine_.next_fire_time() != t) {
            throw InvariantViolation("job " + std::to_string(job.job.id.value) + " cannot be provisioned at " +
                                     std::to_string(t));
        }
        engine_.schedule(EventKind::VmProvision, e.payload, t);
        return;
    }
    prov.dc->dispatch(job.job.id, job.job.workload_volume, vm, t);
    const SimTime running = prov.dc->vm(vm).running_at;
    if (running + datacenter::execution_ticks(job.job.workload_volume, job.job.cpu_need) != job.plan.completion) {
        throw InvariantViolation("job " + std::to_string(job.job.id.value) + " drifted from its plan");
    }
    prov.alloc->monitor().dispatched(job.job.id, running, job.job.cpu_need);
}

void Simulation::on_complete(const Event& e) {
    const SimTime t = e.fire_at;
    const RequestId id{e.payload[0]};
    const VmId vm{e.payload[1]};
    auto& job = jobs_.at(id);
    auto& prov = providers_[job.provider];

    const allocator::UsageRecord usage{id, vm, {prov.dc->vm(vm).running_at, t}, job.job.workload_volume};
    prov.alloc->meter(usage);
    engine_.emit(EventKind::UsageMetered, {id.value, vm.value, usage.interval.begin, usage.interval.end,
                                           usage.cu_ticks, prov.spec->id.value});
    prov.dc->finish_execution(vm);
    prov.dc->release_vm(vm, t);
    prov.alloc->monitor().completed(id, t);
    const auto invoice = prov.alloc->finalize_charge(id);
    engine_.emit(EventKind::InvoiceFinalized,
                 {id.value, invoice.buyer.value, invoice.total.micros(), invoice.quoted.micros(),
                  invoice.status == allocator::JobState::Completed ? 0 : 1, invoice.workload_volume});
    invoices_.push_back({invoice, prov.spec->id, requests_[job.request].id});

    const auto s = settle(job.sla, t, t, invoice.total);
    const Rational fee_rate = scenario_.exchange.fee_rate;
    if (job.auctioned && fee_rate > 0) {
        const Money fee = min(scale(s.payment, fee_rate), s.seller_net());
        if (fee > Money{0}) {
            post(ledger_.transfer(prov.account, exchange_account_, fee, exchange::TransferReason::Fee, t, job.sla));
        }
    }

    const std::size_t i = job.request;
    auto& st = states_[i];
    const auto& r = requests_[i];
    const SimTime promised = sla_by_id_.at(*st.consumer_sla).promised_completion;
    switch (st.route) {
    case Route::Direct:
        st.closed = true;
        engine_.emit(EventKind::RequestCompleted, {r.id.value, t, promised});
        break;
    case Route::Negotiated:
        st.closed = true;
        settle(*st.consumer_sla, t, t);
        engine_.emit(EventKind::RequestCompleted, {r.id.value, t, promised});
        break;
    case Route::Auctioned:
        --st.pieces_open;
        st.last_completion = std::max(st.last_completion, t);
        if (st.pieces_open == 0 && st.abandoned) {
            fail_request(i, t);
        } else if (st.pieces_open == 0 && st.unplaced == 0) {
            st.closed = true;
            settle(*st.consumer_sla, st.last_completion, t);
            engine_.emit(EventKind::RequestCompleted, {r.id.value, st.last_completion, promised});
        }
        break;
    }
    jobs_.erase(id);
}

RunResult Simulation::execute() {
    const auto stats = engine_.run_until(scenario_.drain ? kNever : scenario_.horizon);
    const SimTime end = stats.final_clock;

    ledger_.check_conservation();
    for (const auto& p : providers_) {
        p.dc->check_invariants();
    }

    RunResult out;
    out.seed = seed_;
    out.mode = mode_;
    out.scenario_digest = workload::scenario_digest(scenario_);
    out.normalized_scenario = workload::emit_scenario(scenario_);
    out.request_digest = workload::request_digest(requests_);
    out.request_count = requests_.size();
    out.trace_hash = trace_.hash();
    out.trace_lines = trace_.lines();
    out.final_clock = end;

    out.summary = collector_->summary(end);
    out.summary.scenario_digest = out.scenario_digest;
    out.summary.seed = seed_;
    out.summary.mode = std::string{workload::to_string(mode_)};
    out.summary.check();

    out.journal = ledger_.journal();
    out.accounts = ledger_.accounts();
    out.invoices = invoices_;
    out.clearing = clearing_;
    out.slas = slas_;
    out.settlements = settlements_;
    out.reservations = reservations_.granted();

    metrics::CrossCheckInput input{out.journal, out.accounts, {}};
    for (const auto& row : invoices_) {
        input.invoices.push_back(row.invoice);
    }
    const metrics::ReportHeader header{"mocsim", out.normalized_scenario, hex64(out.request_digest),
                                       hex64(out.trace_hash)};
    out.summary_document =
        metrics::report(*collector_, input, out.summary, metrics::ReportFormat::SummaryDocument, header);
    out.metrics_table = metrics::report(*collector_, input, out.summary, metrics::ReportFormat::Table, header);
    out.journal_table = metrics::render_journal(out.journal, out.accounts);
    return out;
}

} // namespace

RunResult run_scenario(const workload::Scenario& scenario, const RunOptions& options) {
    Simulation sim(scenario, options);
    return sim.execute();
}

std::string render_requests(const std::vector<allocator::ServiceRequest>& requests) {
    std::ostringstream out;
    out << "request_id,consumer,submit_time,workload_volume,cpu_need,mem_need,deadline,budget,reliability_class,"
           "security_class\n";
    for (const auto& r : requests) {
        out << r.id << ',' << r.consumer << ',' << r.submit_time << ',' << r.workload_volume << ',' << r.cpu_need
            << ',' << r.mem_need << ',' << r.qos.deadline << ',' << r.qos.budget << ',' << r.qos.reliability_class
            << ',' << r.qos.security_class << '\n';
    }
    return out.str();
}

std::string render_invoices(const std::vector<InvoiceRow>& invoices) {
    std::ostringstream out;
    out << "job,request,provider,buyer,quoted,total,status\n";
    for (const auto& row : invoices) {
        const auto& inv = row.invoice;
        out << inv.request << ',' << row.parent << ',' << row.provider << ',' << inv.buyer << ',' << inv.quoted << ','
            << inv.total << ',' << allocator::to_string(inv.status) << '\n';
    }
    return out.str();
}

std::string render_clearing(const std::vector<ClearingRow>& rows) {
    std::ostringstream out;
    out << "round_time,bid_id,ask_id,quantity,clearing_price\n";
    for (const auto& row : rows) {
        out << row.round_time << ',' << row.bid << ',' << row.ask << ',' << row.quantity << ',' << row.clearing_price
            << '\n';
    }
    return out.str();
}

} // namespace mocsim::run
