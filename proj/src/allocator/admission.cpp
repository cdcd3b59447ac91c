#include <mocsim/allocator/admission.hpp>

#include <mocsim/core/error.hpp>

#include <limits>
#include <string>

namespace mocsim::allocator {

namespace {

// Far enough out that start + duration cannot overflow.
constexpr SimTime kOpenEnded = std::numeric_limits<SimTime>::max() / 4;

} // namespace

std::string_view to_string(RejectReason r) noexcept {
    switch (r) {
    case RejectReason::DeadlineInfeasible:
        return "DeadlineInfeasible";
    case RejectReason::BudgetInfeasible:
        return "BudgetInfeasible";
    case RejectReason::CapacityUnavailable:
        return "CapacityUnavailable";
    }
    return "?";
}

AdmissionController::AdmissionController(std::vector<datacenter::MachineSpec> machines, SimTime boot_delay,
                                         datacenter::PlacementPolicy placement, ProviderGrades grades,
                                         PricingPolicy pricing, bool pad_with_lateness)
    : machines_(std::move(machines)),
      cpu_(machines_.size()),
      mem_(machines_.size()),
      boot_delay_(boot_delay),
      placement_(placement),
      grades_(grades),
      pricing_(std::move(pricing)),
      pad_with_lateness_(pad_with_lateness) {
    validate(pricing_);
}

void AdmissionController::set_pricing(PricingPolicy p) {
    validate(p);
    pricing_ = std::move(p);
}

std::int64_t AdmissionController::max_machine_cpu() const noexcept {
    std::int64_t best = 0;
    for (const auto& m : machines_) {
        best = std::max(best, m.cpu_capacity);
    }
    return best;
}

std::optional<VmPlan> AdmissionController::earliest_plan(datacenter::Entitlement need, std::int64_t workload_volume,
                                                         SimTime earliest, SimTime latest_completion) const {
    const SimTime run = datacenter::execution_ticks(workload_volume, need.cpu);
    const SimTime occupancy = boot_delay_ + run;
    const SimTime latest_start = latest_completion >= kOpenEnded ? kOpenEnded : latest_completion - occupancy;
    if (latest_start < earliest) {
        return std::nullopt;
    }

    std::optional<VmPlan> best;
    std::int64_t best_free = 0;
    for (std::size_t i = 0; i < machines_.size(); ++i) {
        const auto& spec = machines_[i];
        if (spec.cpu_capacity < need.cpu || spec.mem_capacity < need.mem) {
            continue;
        }
        auto s = earliest_joint_fit(cpu_[i], need.cpu, spec.cpu_capacity, mem_[i], need.mem, spec.mem_capacity,
                                    earliest, latest_start, occupancy);
        if (!s) {
            continue;
        }
        const std::int64_t free = spec.cpu_capacity - cpu_[i].level_at(*s);
        bool better = !best || *s < best->provision_at;
        if (best && *s == best->provision_at) {
            switch (placement_) {
            case datacenter::PlacementPolicy::WorstFit:
                better = free > best_free;
                break;
            case datacenter::PlacementPolicy::BestFit:
                better = free < best_free;
                break;
            case datacenter::PlacementPolicy::FirstFit:
                better = false;
                break;
            }
        }
        if (better) {
            best = VmPlan{MachineId{static_cast<std::int64_t>(i)}, need, *s, *s + boot_delay_, *s + occupancy};
            best_free = free;
        }
    }
    return best;
}

AdmissionDecision AdmissionController::examine(const ServiceRequest& request, SimTime now,
                                               const datacenter::VmAvailabilitySnapshot& snapshot,
                                               const LoadStats& load_stats, const ExamineOptions& options) const {
    const datacenter::Entitlement need{request.cpu_need, request.mem_need};
    const SimTime run = datacenter::execution_ticks(request.workload_volume, request.cpu_need);
    SimTime pad = 0;
    if (pad_with_lateness_ && load_stats.mean_lateness && *load_stats.mean_lateness > 0) {
        const auto& l = *load_stats.mean_lateness;
        pad = static_cast<SimTime>(ceil_div(l.numerator(), l.denominator()));
    }
    const Money price =
        options.fixed_price ? *options.fixed_price : quote(request, pricing_, snapshot.cpu_utilization());
    const bool graded =
        grades_.reliability >= request.qos.reliability_class && grades_.security >= request.qos.security_class;

    if (options.fifo) {
        if (price > request.qos.budget) {
            return {Reject{RejectReason::BudgetInfeasible}};
        }
        if (!graded) {
            return {Reject{RejectReason::CapacityUnavailable}};
        }
        const SimTime earliest = std::max(now, fifo_last_start_ - boot_delay_);
        auto plan = earliest_plan(need, request.workload_volume, earliest, kOpenEnded);
        if (!plan) {
            return {Reject{RejectReason::CapacityUnavailable}};
        }
        return {Accept{*plan, price, request.qos.deadline}};
    }

    if (now + boot_delay_ + run + pad > request.qos.deadline) {
        return {Reject{RejectReason::DeadlineInfeasible}};
    }
    if (price > request.qos.budget) {
        return {Reject{RejectReason::BudgetInfeasible}};
    }
    if (!graded) {
        return {Reject{RejectReason::CapacityUnavailable}};
    }
    auto plan = earliest_plan(need, request.workload_volume, now, request.qos.deadline - pad);
    if (!plan) {
        return {Reject{RejectReason::CapacityUnavailable}};
    }
    return {Accept{*plan, price, plan->completion}};
}

void AdmissionController::commit(RequestId request, const VmPlan& plan) {
    if (commitments_.contains(request)) {
        throw InvariantViolation("request " + std::to_string(request.value) + " already committed");
    }
    const auto i = static_cast<std::size_t>(plan.machine.value);
    if (i >= machines_.size()) {
        throw InvariantViolation("plan names unknown machine " + std::to_string(plan.machine.value));
    }
    const auto window = plan.occupancy();
    cpu_[i].add(window, plan.entitlement.cpu);
    mem_[i].add(window, plan.entitlement.mem);
    if (cpu_[i].max_over(window) > machines_[i].cpu_capacity ||
        mem_[i].max_over(window) > machines_[i].mem_capacity) {
        cpu_[i].add(window, -plan.entitlement.cpu);
        mem_[i].add(window, -plan.entitlement.mem);
        throw InvariantViolation("commitment for request " + std::to_string(request.value) + " overloads machine " +
                                 std::to_string(i));
    }
    commitments_.emplace(request, plan);
    fifo_last_start_ = std::max(fifo_last_start_, plan.start);
}

void AdmissionController::cancel(RequestId request, SimTime at) {
    auto it = commitments_.find(request);
    if (it == commitments_.end()) {
        throw UnknownRequest("no commitment for request " + std::to_string(request.value));
    }
    const auto& plan = it->second;
    const Interval rest{std::max(at, plan.provision_at), plan.completion};
    if (!rest.empty()) {
        const auto i = static_cast<std::size_t>(plan.machine.value);
        cpu_[i].add(rest, -plan.entitlement.cpu);
        mem_[i].add(rest, -plan.entitlement.mem);
    }
    commitments_.erase(it);
}

void AdmissionController::prune_before(SimTime t) {
    for (auto& p : cpu_) {
        p.prune_before(t);
    }
    for (auto& p : mem_) {
        p.prune_before(t);
    }
}

std::int64_t AdmissionController::committed_cpu(MachineId m, SimTime t) const {
    return cpu_.at(static_cast<std::size_t>(m.value)).level_at(t);
}

std::int64_t AdmissionController::committed_mem(MachineId m, SimTime t) const {
    return mem_.at(static_cast<std::size_t>(m.value)).level_at(t);
}

std::int64_t AdmissionController::free_cpu_ticks(Interval window) const {
    if (window.empty()) {
        return 0;
    }
    Wide total = 0;
    for (std::size_t i = 0; i < machines_.size(); ++i) {
        total += Wide{machines_[i].cpu_capacity} * window.length() - cpu_[i].area(window);
    }
    return narrow(total);
}

} // namespace mocsim::allocator
