#include <mocsim/workload/generator.hpp>

#include <mocsim/core/error.hpp>
#include <mocsim/core/hash.hpp>

#include <algorithm>
#include <cmath>

namespace mocsim::workload {

namespace {

const std::string kArrivals = "arrivals";
const std::string kWorkload = "workload";

std::int64_t draw_at_least(sim::RngStreams& rng, const sim::Distribution& d, std::int64_t floor) {
    const double x = rng.draw(kWorkload, d);
    return std::max<std::int64_t>(floor, std::llround(x));
}

const QosClass& pick_class(sim::RngStreams& rng, const std::vector<QosClass>& classes) {
    const double u = rng.draw_unit(kWorkload);
    Rational cumulative{0};
    for (const auto& c : classes) {
        cumulative += c.weight;
        if (u < boost::rational_cast<double>(cumulative)) {
            return c;
        }
    }
    return classes.back();
}

} // namespace

std::vector<allocator::ServiceRequest> generate_requests(const WorkloadSpec& spec,
                                                         const std::vector<ParticipantId>& consumers,
                                                         std::uint64_t seed, SimTime horizon, SimTime boot_delay) {
    std::vector<allocator::ServiceRequest> out;
    if (const auto* trace = std::get_if<TraceArrival>(&spec.arrival)) {
        for (const auto& r : trace->requests) {
            allocator::ServiceRequest req;
            req.consumer = r.consumer;
            req.submit_time = r.submit_time;
            req.workload_volume = r.workload_volume;
            req.cpu_need = r.cpu_need;
            req.mem_need = r.mem_need;
            req.qos = {r.deadline, r.budget, r.reliability_class, r.security_class};
            out.push_back(req);
        }
        std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.submit_time < b.submit_time; });
    } else if (!consumers.empty() && !spec.classes.empty()) {
        const Rational rate = std::get<PoissonArrival>(spec.arrival).rate * spec.demand_scale;
        sim::RngStreams rng(seed);
        rng.register_stream(kArrivals);
        rng.register_stream(kWorkload);
        const sim::dist::Exponential gap{boost::rational_cast<double>(rate)};
        double t = 0.0;
        while (true) {
            t += rng.draw(kArrivals, gap);
            if (!(t < static_cast<double>(horizon))) {
                break;
            }
            allocator::ServiceRequest req;
            req.submit_time = static_cast<SimTime>(std::floor(t));
            const auto who = rng.draw_int(kWorkload, 0, static_cast<std::int64_t>(consumers.size()) - 1);
            req.consumer = consumers[static_cast<std::size_t>(who)];
            req.workload_volume = draw_at_least(rng, spec.volume, 1);
            req.cpu_need = draw_at_least(rng, spec.cpu_need, 1);
            req.mem_need = draw_at_least(rng, spec.mem_need, 0);
            const QosClass& cls = pick_class(rng, spec.classes);
            const Wide runtime = Wide{boot_delay} + ceil_div(req.workload_volume, req.cpu_need);
            const Wide slack = ceil_div(Wide{cls.slack.numerator()} * runtime, cls.slack.denominator());
            req.qos.deadline = req.submit_time + narrow(std::max<Wide>(1, slack));
            req.qos.budget = Money{narrow(ceil_div(Wide{cls.budget_factor.numerator()} * spec.reference_rate.micros() *
                                                       req.workload_volume,
                                                   cls.budget_factor.denominator()))};
            req.qos.reliability_class = cls.reliability_class;
            req.qos.security_class = cls.security_class;
            out.push_back(req);
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].id = RequestId{static_cast<std::int64_t>(i)};
    }
    return out;
}

std::vector<allocator::ServiceRequest> generate_requests(const Scenario& scenario, std::uint64_t seed) {
    std::vector<ParticipantId> consumers;
    for (const auto& c : scenario.consumers) {
        consumers.push_back(c.id);
    }
    return generate_requests(scenario.workload, consumers, seed, scenario.horizon, scenario.datacenter.boot_delay);
}

std::uint64_t request_digest(const std::vector<allocator::ServiceRequest>& requests) {
    Fnv1a h;
    for (const auto& r : requests) {
        h.update(r.id.value)
            .update(r.consumer.value)
            .update(r.submit_time)
            .update(r.workload_volume)
            .update(r.cpu_need)
            .update(r.mem_need)
            .update(r.qos.deadline)
            .update(r.qos.budget.micros())
            .update(std::int64_t{r.qos.reliability_class})
            .update(std::int64_t{r.qos.security_class});
    }
    return h.digest();
}

std::vector<exchange::DirectoryListing> proxy_select_brokers(const ConsumerProxy& proxy,
                                                             const std::vector<exchange::DirectoryListing>& listings,
                                                             std::int64_t k, std::int64_t volume) {
    std::vector<exchange::DirectoryListing> brokers;
    for (const auto& l : listings) {
        if (l.role == exchange::ParticipantRole::Broker && proxy.affordable(l.price_hint * volume)) {
            brokers.push_back(l);
        }
    }
    if (brokers.empty() || k <= 0) {
        throw NoBrokerAvailable("no affordable broker for consumer " + std::to_string(proxy.consumer.value));
    }
    std::sort(brokers.begin(), brokers.end(), [](const auto& a, const auto& b) {
        return a.price_hint != b.price_hint ? a.price_hint < b.price_hint : a.participant < b.participant;
    });
    if (static_cast<std::int64_t>(brokers.size()) > k) {
        brokers.resize(static_cast<std::size_t>(k));
    }
    return brokers;
}

} // namespace mocsim::workload
