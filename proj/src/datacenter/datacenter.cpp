#include <mocsim/datacenter/datacenter.hpp>

#include <mocsim/core/error.hpp>

#include <string>

namespace mocsim::datacenter {

std::vector<MachineSpec> expand_fleet(const std::vector<FleetGroup>& groups) {
    std::vector<MachineSpec> out;
    for (const auto& g : groups) {
        for (std::int64_t i = 0; i < g.count; ++i) {
            out.push_back(g.spec);
        }
    }
    return out;
}

std::string_view to_string(VmState s) noexcept {
    switch (s) {
    case VmState::Starting:
        return "Starting";
    case VmState::Running:
        return "Running";
    case VmState::Stopped:
        return "Stopped";
    }
    return "?";
}

std::string_view to_string(PlacementPolicy p) noexcept {
    switch (p) {
    case PlacementPolicy::WorstFit:
        return "worst_fit";
    case PlacementPolicy::BestFit:
        return "best_fit";
    case PlacementPolicy::FirstFit:
        return "first_fit";
    }
    return "?";
}

std::optional<PlacementPolicy> placement_from_string(std::string_view s) noexcept {
    for (auto p : {PlacementPolicy::WorstFit, PlacementPolicy::BestFit, PlacementPolicy::FirstFit}) {
        if (to_string(p) == s) {
            return p;
        }
    }
    return std::nullopt;
}

std::int64_t VmAvailabilitySnapshot::total_cpu() const noexcept {
    std::int64_t t = 0;
    for (const auto& m : machines) {
        t += m.capacity.cpu_capacity;
    }
    return t;
}

std::int64_t VmAvailabilitySnapshot::free_cpu() const noexcept {
    std::int64_t t = 0;
    for (const auto& m : machines) {
        t += m.free_cpu;
    }
    return t;
}

Rational VmAvailabilitySnapshot::cpu_utilization() const {
    const auto total = total_cpu();
    return total == 0 ? Rational{0} : Rational{total - free_cpu(), total};
}

std::optional<MachineId> choose_machine(PlacementPolicy policy, const std::vector<PhysicalMachine>& machines,
                                        Entitlement need) {
    const PhysicalMachine* best = nullptr;
    for (const auto& m : machines) {
        if (m.free_cpu() < need.cpu || m.free_mem() < need.mem) {
            continue;
        }
        if (best == nullptr) {
            best = &m;
            if (policy == PlacementPolicy::FirstFit) {
                break;
            }
            continue;
        }
        const bool better = policy == PlacementPolicy::WorstFit ? m.free_cpu() > best->free_cpu()
                                                                : m.free_cpu() < best->free_cpu();
        if (better) {
            best = &m;
        }
    }
    if (best == nullptr) {
        return std::nullopt;
    }
    return best->id;
}

SimTime execution_ticks(std::int64_t workload_volume, std::int64_t cpu_entitlement) {
    if (cpu_entitlement <= 0) {
        throw std::invalid_argument("cpu entitlement must be positive");
    }
    return static_cast<SimTime>(ceil_div(workload_volume, cpu_entitlement));
}

Datacenter::Datacenter(sim::Engine& engine, std::int64_t owner, std::vector<MachineSpec> machines,
                       SimTime boot_delay, PlacementPolicy policy)
    : engine_(engine), owner_(owner), boot_delay_(boot_delay), policy_(policy) {
    if (boot_delay < 0) {
        throw std::invalid_argument("boot delay must be non-negative");
    }
    machines_.reserve(machines.size());
    for (std::size_t i = 0; i < machines.size(); ++i) {
        if (machines[i].cpu_capacity <= 0 || machines[i].mem_capacity < 0) {
            throw std::invalid_argument("machine capacity must be positive");
        }
        machines_.push_back(PhysicalMachine{MachineId{static_cast<std::int64_t>(i)}, machines[i], {}, {}});
        total_.cpu += machines[i].cpu_capacity;
        total_.mem += machines[i].mem_capacity;
    }
}

Vm& Datacenter::vm_mut(VmId id) {
    auto it = vms_.find(id);
    if (it == vms_.end()) {
        throw UnknownVm("vm " + std::to_string(id.value));
    }
    return it->second;
}

const Vm& Datacenter::vm(VmId id) const {
    auto it = vms_.find(id);
    if (it == vms_.end()) {
        throw UnknownVm("vm " + std::to_string(id.value));
    }
    return it->second;
}

Entitlement Datacenter::allocated() const noexcept {
    Entitlement e;
    for (const auto& m : machines_) {
        e.cpu += m.allocated.cpu;
        e.mem += m.allocated.mem;
    }
    return e;
}

std::size_t Datacenter::live_vms() const noexcept {
    std::size_t n = 0;
    for (const auto& [id, v] : vms_) {
        n += v.stopped ? 0 : 1;
    }
    return n;
}

void Datacenter::check_machine(const PhysicalMachine& m) const {
    if (m.allocated.cpu > m.capacity.cpu_capacity || m.allocated.mem > m.capacity.mem_capacity ||
        m.allocated.cpu < 0 || m.allocated.mem < 0) {
        throw InvariantViolation("machine " + std::to_string(m.id.value) + " of provider " + std::to_string(owner_) +
                                 " allocates cpu " + std::to_string(m.allocated.cpu) + "/" +
                                 std::to_string(m.capacity.cpu_capacity) + ", mem " + std::to_string(m.allocated.mem) +
                                 "/" + std::to_string(m.capacity.mem_capacity));
    }
    Entitlement sum;
    for (auto id : m.hosted) {
        const auto& v = vms_.at(id);
        sum.cpu += v.entitlement.cpu;
        sum.mem += v.entitlement.mem;
    }
    if (sum != m.allocated) {
        throw InvariantViolation("machine " + std::to_string(m.id.value) + " allocation disagrees with hosted VMs");
    }
}

void Datacenter::check_invariants() const {
    for (const auto& m : machines_) {
        check_machine(m);
    }
}

VmId Datacenter::provision_vm(std::optional<MachineId> machine, Entitlement entitlement, SimTime at) {
    if (entitlement.cpu <= 0 || entitlement.mem < 0) {
        throw std::invalid_argument("entitlement must have positive cpu and non-negative memory");
    }
    MachineId target;
    if (machine) {
        if (!machine->valid() || static_cast<std::size_t>(machine->value) >= machines_.size()) {
            throw InsufficientCapacity("no machine " + std::to_string(machine->value));
        }
        const auto& m = machines_[static_cast<std::size_t>(machine->value)];
        if (m.free_cpu() < entitlement.cpu || m.free_mem() < entitlement.mem) {
            throw InsufficientCapacity("machine " + std::to_string(machine->value) + " has " +
                                       std::to_string(m.free_cpu()) + " cu free, need " +
                                       std::to_string(entitlement.cpu));
        }
        target = *machine;
    } else {
        auto chosen = choose_machine(policy_, machines_, entitlement);
        if (!chosen) {
            throw InsufficientCapacity("no machine can host " + std::to_string(entitlement.cpu) + " cu / " +
                                       std::to_string(entitlement.mem) + " MB");
        }
        target = *chosen;
    }

    const VmId id{next_vm_++};
    auto& m = machines_[static_cast<std::size_t>(target.value)];
    Vm v;
    v.id = id;
    v.host = target;
    v.entitlement = entitlement;
    v.provisioned_at = at;
    v.running_at = at + boot_delay_;
    vms_.emplace(id, v);
    m.hosted.insert(id);
    m.allocated.cpu += entitlement.cpu;
    m.allocated.mem += entitlement.mem;
    check_machine(m);
    engine_.emit(sim::EventKind::VmProvisioned,
                 {id.value, owner_, target.value, entitlement.cpu, entitlement.mem, v.running_at});
    return id;
}

Entitlement Datacenter::release_vm(VmId id, SimTime /*at*/) {
    auto& v = vm_mut(id);
    if (v.stopped) {
        throw AlreadyStopped("vm " + std::to_string(id.value));
    }
    v.stopped = true;
    v.assigned.reset();
    auto& m = machines_[static_cast<std::size_t>(v.host.value)];
    m.hosted.erase(id);
    m.allocated.cpu -= v.entitlement.cpu;
    m.allocated.mem -= v.entitlement.mem;
    check_machine(m);
    engine_.emit(sim::EventKind::VmReleased,
                 {id.value, owner_, v.host.value, v.entitlement.cpu, v.entitlement.mem});
    return v.entitlement;
}

VmAvailabilitySnapshot Datacenter::vm_monitor_snapshot(SimTime at) const {
    VmAvailabilitySnapshot s;
    s.snapshot_time = at;
    s.machines.reserve(machines_.size());
    for (const auto& m : machines_) {
        s.machines.push_back({m.id, m.capacity, m.free_cpu(), m.free_mem()});
    }
    for (const auto& [id, v] : vms_) {
        if (v.stopped) {
            continue;
        }
        s.vms.push_back({id, v.host, v.state_at(at), v.entitlement, v.assigned});
    }
    return s;
}

sim::EventId Datacenter::dispatch(RequestId request, std::int64_t workload_volume, VmId id, SimTime at) {
    auto& v = vm_mut(id);
    if (v.stopped) {
        throw AlreadyStopped("vm " + std::to_string(id.value));
    }
    if (v.assigned) {
        throw VmBusy("vm " + std::to_string(id.value) + " is executing request " +
                     std::to_string(v.assigned->value));
    }
    if (workload_volume <= 0) {
        throw std::invalid_argument("workload volume must be positive");
    }
    const SimTime start = at > v.running_at ? at : v.running_at;
    const SimTime completion = start + execution_ticks(workload_volume, v.entitlement.cpu);
    v.assigned = request;
    v.busy_until = completion;
    engine_.emit(sim::EventKind::ExecutionStarted, {request.value, id.value, owner_, start, completion});
    return engine_.schedule(sim::EventKind::ExecutionComplete, {request.value, id.value, owner_}, completion);
}

void Datacenter::finish_execution(VmId id) { vm_mut(id).assigned.reset(); }

} // namespace mocsim::datacenter
