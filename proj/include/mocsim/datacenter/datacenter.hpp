#pragma once

#include <mocsim/core/types.hpp>
#include <mocsim/sim/engine.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

namespace mocsim::datacenter {

struct MachineSpec {
    std::int64_t cpu_capacity = 0; ///< compute-units per tick
    std::int64_t mem_capacity = 0; ///< MB

    friend bool operator==(const MachineSpec&, const MachineSpec&) = default;
};

/// `count` identical machines, as written in a scenario fleet.
struct FleetGroup {
    std::int64_t count = 0;
    MachineSpec spec;

    friend bool operator==(const FleetGroup&, const FleetGroup&) = default;
};

[[nodiscard]] std::vector<MachineSpec> expand_fleet(const std::vector<FleetGroup>& groups);

struct Entitlement {
    std::int64_t cpu = 0;
    std::int64_t mem = 0;

    friend bool operator==(const Entitlement&, const Entitlement&) = default;
};

enum class VmState { Starting, Running, Stopped };

[[nodiscard]] std::string_view to_string(VmState s) noexcept;

struct PhysicalMachine {
    MachineId id;
    MachineSpec capacity;
    Entitlement allocated;
    std::set<VmId> hosted;

    [[nodiscard]] std::int64_t free_cpu() const noexcept { return capacity.cpu_capacity - allocated.cpu; }
    [[nodiscard]] std::int64_t free_mem() const noexcept { return capacity.mem_capacity - allocated.mem; }
};

struct Vm {
    VmId id;
    MachineId host;
    Entitlement entitlement;
    SimTime provisioned_at = 0;
    SimTime running_at = 0; ///< provisioned_at + boot delay
    bool stopped = false;
    std::optional<RequestId> assigned;
    SimTime busy_until = 0;

    /// Starting before running_at, Running after, Stopped once released.
    [[nodiscard]] VmState state_at(SimTime t) const noexcept {
        if (stopped) {
            return VmState::Stopped;
        }
        return t < running_at ? VmState::Starting : VmState::Running;
    }
};

struct MachineAvailability {
    MachineId id;
    MachineSpec capacity;
    std::int64_t free_cpu = 0;
    std::int64_t free_mem = 0;

    friend bool operator==(const MachineAvailability&, const MachineAvailability&) = default;
};

struct VmAvailability {
    VmId id;
    MachineId host;
    VmState state = VmState::Starting;
    Entitlement entitlement;
    std::optional<RequestId> assigned;

    friend bool operator==(const VmAvailability&, const VmAvailability&) = default;
};

/// What the VM Monitor reports: free capacity per machine and every live VM.
struct VmAvailabilitySnapshot {
    SimTime snapshot_time = 0;
    std::vector<MachineAvailability> machines;
    std::vector<VmAvailability> vms; ///< ordered by vm id; stopped VMs omitted

    [[nodiscard]] std::int64_t total_cpu() const noexcept;
    [[nodiscard]] std::int64_t free_cpu() const noexcept;
    /// Allocated cpu over total cpu; zero for an empty fleet.
    [[nodiscard]] Rational cpu_utilization() const;

    friend bool operator==(const VmAvailabilitySnapshot&, const VmAvailabilitySnapshot&) = default;
};

enum class PlacementPolicy { WorstFit, BestFit, FirstFit };

[[nodiscard]] std::string_view to_string(PlacementPolicy p) noexcept;
[[nodiscard]] std::optional<PlacementPolicy> placement_from_string(std::string_view s) noexcept;

/// Pick a machine with room for `need` under `policy`; ties go to the lowest id.
/// WorstFit prefers the most free cpu, BestFit the least that still fits.
[[nodiscard]] std::optional<MachineId> choose_machine(PlacementPolicy policy,
                                                      const std::vector<PhysicalMachine>& machines,
                                                      Entitlement need);

/// Physical machines and the VMs running on them.
///
/// Capacity is reserved from the instant a VM is provisioned (it is Starting
/// for `boot_delay` ticks, then Running) and returned when it is released.
/// Every lifecycle change re-checks the capacity invariant of the touched
/// machine and throws InvariantViolation if it is broken. Lifecycle records
/// are emitted into the engine trace, tagged with `owner`.
class Datacenter {
public:
    Datacenter(sim::Engine& engine, std::int64_t owner, std::vector<MachineSpec> machines, SimTime boot_delay = 0,
               PlacementPolicy policy = PlacementPolicy::WorstFit);

    /// Throws InsufficientCapacity when the given machine (or, without a hint,
    /// every machine) lacks room.
    VmId provision_vm(std::optional<MachineId> machine, Entitlement entitlement, SimTime at);

    /// Throws UnknownVm or AlreadyStopped. A VM released mid-execution drops its request.
    Entitlement release_vm(VmId vm, SimTime at);

    [[nodiscard]] VmAvailabilitySnapshot vm_monitor_snapshot(SimTime at) const;

    /// Start `request` on `vm`. Execution begins when the VM is Running and
    /// lasts ceil(workload_volume / cpu entitlement) ticks; the completion
    /// event (ExecutionComplete) is scheduled on the engine. Throws VmBusy if
    /// the VM already executes a request.
    sim::EventId dispatch(RequestId request, std::int64_t workload_volume, VmId vm, SimTime at);

    /// Mark the VM idle after its request completes.
    void finish_execution(VmId vm);

    [[nodiscard]] const Vm& vm(VmId id) const;
    [[nodiscard]] const std::vector<PhysicalMachine>& machines() const noexcept { return machines_; }
    [[nodiscard]] std::int64_t total_cpu() const noexcept { return total_.cpu; }
    [[nodiscard]] std::int64_t total_mem() const noexcept { return total_.mem; }
    [[nodiscard]] Entitlement allocated() const noexcept;
    [[nodiscard]] SimTime boot_delay() const noexcept { return boot_delay_; }
    [[nodiscard]] std::int64_t owner() const noexcept { return owner_; }
    [[nodiscard]] std::size_t live_vms() const noexcept;

    /// Capacity safety and conservation over every machine.
    void check_invariants() const;

private:
    Vm& vm_mut(VmId id);
    void check_machine(const PhysicalMachine& m) const;

    sim::Engine& engine_;
    std::int64_t owner_;
    SimTime boot_delay_;
    PlacementPolicy policy_;
    std::vector<PhysicalMachine> machines_;
    std::map<VmId, Vm> vms_;
    Entitlement total_;
    std::int64_t next_vm_ = 0;
};

/// Duration of a request on an entitlement: ceil(volume / cpu).
[[nodiscard]] SimTime execution_ticks(std::int64_t workload_volume, std::int64_t cpu_entitlement);

} // namespace mocsim::datacenter
