#pragma once

#include <mocsim/allocator/request.hpp>
#include <mocsim/exchange/directory.hpp>
#include <mocsim/workload/scenario.hpp>

#include <cstdint>
#include <vector>

namespace mocsim::workload {

/// Requests of one run, ordered by submit time and numbered from 0.
///
/// Poisson arrivals draw inter-arrival gaps from stream "arrivals"; every
/// other draw (consumer, sizes, class) comes from stream "workload". The
/// minimal runtime of a request is boot_delay + ceil(volume / cpu_need).
/// Consumers are drawn uniformly from `consumers`.
[[nodiscard]] std::vector<allocator::ServiceRequest> generate_requests(const WorkloadSpec& spec,
                                                                       const std::vector<ParticipantId>& consumers,
                                                                       std::uint64_t seed, SimTime horizon,
                                                                       SimTime boot_delay = 0);

/// Requests for a scenario at `seed`.
[[nodiscard]] std::vector<allocator::ServiceRequest> generate_requests(const Scenario& scenario, std::uint64_t seed);

/// FNV-1a over every field of every request; equal lists give equal digests.
[[nodiscard]] std::uint64_t request_digest(const std::vector<allocator::ServiceRequest>& requests);

/// Consumer-side resource management proxy.
struct ConsumerProxy {
    ParticipantId consumer;
    Money budget_constraint;
    Money outstanding; ///< committed spend not yet settled

    /// Whether committing `cost` more keeps outstanding spend within the constraint.
    [[nodiscard]] bool affordable(Money cost) const noexcept { return outstanding + cost <= budget_constraint; }
};

/// Up to `k` broker listings by ascending price hint (ties by participant id)
/// whose estimated cost (hint * volume) keeps the proxy within its budget
/// constraint. Non-broker listings are ignored. Throws NoBrokerAvailable when
/// none qualifies.
[[nodiscard]] std::vector<exchange::DirectoryListing> proxy_select_brokers(
    const ConsumerProxy& proxy, const std::vector<exchange::DirectoryListing>& listings, std::int64_t k,
    std::int64_t volume);

} // namespace mocsim::workload
