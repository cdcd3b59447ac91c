#pragma once

#include <mocsim/core/types.hpp>

#include <cstdint>

namespace mocsim::allocator {

/// Consumer QoS terms. Classes are minimum provider grades.
struct QosSpec {
    SimTime deadline = 0; ///< absolute
    Money budget;         ///< maximum total payment
    std::int32_t reliability_class = 0;
    std::int32_t security_class = 0;

    friend bool operator==(const QosSpec&, const QosSpec&) = default;
};

struct ServiceRequest {
    RequestId id;
    ParticipantId consumer;
    SimTime submit_time = 0;
    std::int64_t workload_volume = 0; ///< compute-unit-ticks
    std::int64_t cpu_need = 0;        ///< compute-units per tick
    std::int64_t mem_need = 0;        ///< MB
    QosSpec qos;

    /// Throws std::invalid_argument naming the broken invariant.
    void validate() const;

    friend bool operator==(const ServiceRequest&, const ServiceRequest&) = default;
};

} // namespace mocsim::allocator
