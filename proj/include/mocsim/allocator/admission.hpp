#pragma once

#include <mocsim/allocator/pricing.hpp>
#include <mocsim/core/step_profile.hpp>
#include <mocsim/datacenter/datacenter.hpp>

#include <map>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace mocsim::allocator {

enum class RejectReason : std::uint8_t { DeadlineInfeasible, BudgetInfeasible, CapacityUnavailable };

[[nodiscard]] std::string_view to_string(RejectReason r) noexcept;

/// Occupancy on one machine: VM provisioned at `provision_at`, running from
/// `start`, released at `completion`.
struct VmPlan {
    MachineId machine;
    datacenter::Entitlement entitlement;
    SimTime provision_at = 0;
    SimTime start = 0;
    SimTime completion = 0;

    [[nodiscard]] Interval occupancy() const noexcept { return {provision_at, completion}; }

    friend bool operator==(const VmPlan&, const VmPlan&) = default;
};

struct Accept {
    VmPlan vm_plan;
    Money quoted_price;
    SimTime promised_completion = 0;
};

struct Reject {
    RejectReason reason;
};

struct AdmissionDecision {
    std::variant<Accept, Reject> verdict;

    [[nodiscard]] bool accepted() const noexcept { return verdict.index() == 0; }
    [[nodiscard]] const Accept& accept() const { return std::get<Accept>(verdict); }
    [[nodiscard]] RejectReason reason() const { return std::get<Reject>(verdict).reason; }
};

/// Feedback from the request monitor. Absent fields mean no data.
struct LoadStats {
    std::optional<Rational> acceptance_rate;
    std::optional<Rational> mean_utilization;
    std::optional<Rational> mean_lateness;
};

struct ProviderGrades {
    std::int32_t reliability = 0;
    std::int32_t security = 0;
};

struct ExamineOptions {
    /// Price fixed by an external market; skips the pricing policy.
    std::optional<Money> fixed_price;
    /// Baseline mode: FIFO start order, no deadline feasibility test,
    /// promised completion is the request deadline.
    bool fifo = false;
};

/// Commitment calendar per machine and the accept/reject test built on it.
class AdmissionController {
public:
    AdmissionController(std::vector<datacenter::MachineSpec> machines, SimTime boot_delay,
                        datacenter::PlacementPolicy placement, ProviderGrades grades, PricingPolicy pricing,
                        bool pad_with_lateness = false);

    /// Pure: does not modify the calendar.
    [[nodiscard]] AdmissionDecision examine(const ServiceRequest& request, SimTime now,
                                            const datacenter::VmAvailabilitySnapshot& snapshot,
                                            const LoadStats& load_stats, const ExamineOptions& options = {}) const;

    /// Earliest plan for `need` whose provisioning starts at or after `earliest`
    /// and which completes by `latest_completion`.
    [[nodiscard]] std::optional<VmPlan> earliest_plan(datacenter::Entitlement need, std::int64_t workload_volume,
                                                      SimTime earliest, SimTime latest_completion) const;

    void commit(RequestId request, const VmPlan& plan);
    /// Frees the remaining calendar space of a commitment from `at` onwards.
    void cancel(RequestId request, SimTime at);
    /// Drops calendar history before `t`.
    void prune_before(SimTime t);

    [[nodiscard]] const std::map<RequestId, VmPlan>& commitments() const noexcept { return commitments_; }
    [[nodiscard]] std::int64_t committed_cpu(MachineId m, SimTime t) const;
    [[nodiscard]] std::int64_t committed_mem(MachineId m, SimTime t) const;
    /// Uncommitted cpu-ticks summed over all machines inside `window`.
    [[nodiscard]] std::int64_t free_cpu_ticks(Interval window) const;
    [[nodiscard]] const PricingPolicy& pricing() const noexcept { return pricing_; }
    void set_pricing(PricingPolicy p);
    [[nodiscard]] SimTime boot_delay() const noexcept { return boot_delay_; }
    [[nodiscard]] ProviderGrades grades() const noexcept { return grades_; }
    [[nodiscard]] const std::vector<datacenter::MachineSpec>& machines() const noexcept { return machines_; }
    [[nodiscard]] std::int64_t max_machine_cpu() const noexcept;

private:
    std::vector<datacenter::MachineSpec> machines_;
    std::vector<StepProfile> cpu_;
    std::vector<StepProfile> mem_;
    SimTime boot_delay_;
    datacenter::PlacementPolicy placement_;
    ProviderGrades grades_;
    PricingPolicy pricing_;
    bool pad_with_lateness_;
    std::map<RequestId, VmPlan> commitments_;
    SimTime fifo_last_start_ = 0;
};

} // namespace mocsim::allocator
