#include <doctest.h>

#include <mocsim/core/error.hpp>
#include <mocsim/datacenter/datacenter.hpp>

#include <map>
#include <random>

using namespace mocsim;
using namespace mocsim::datacenter;

namespace {

std::vector<MachineSpec> cpus(std::initializer_list<std::int64_t> caps) {
    std::vector<MachineSpec> out;
    for (auto c : caps) {
        out.push_back({c, 1024});
    }
    return out;
}

// Independent fold over VmProvisioned / VmReleased records.
VmAvailabilitySnapshot replay(const std::vector<sim::Event>& trace, const std::vector<MachineSpec>& fleet,
                              SimTime at) {
    std::vector<MachineAvailability> machines;
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        machines.push_back({MachineId{static_cast<std::int64_t>(i)}, fleet[i], fleet[i].cpu_capacity,
                            fleet[i].mem_capacity});
    }
    std::map<std::int64_t, VmAvailability> live;
    std::map<std::int64_t, SimTime> running_at;
    for (const auto& e : trace) {
        if (e.fire_at > at) {
            break;
        }
        if (e.kind == sim::EventKind::VmProvisioned) {
            auto& m = machines[static_cast<std::size_t>(e.payload[2])];
            m.free_cpu -= e.payload[3];
            m.free_mem -= e.payload[4];
            live[e.payload[0]] = {VmId{e.payload[0]}, MachineId{e.payload[2]}, VmState::Starting,
                                  {e.payload[3], e.payload[4]}, std::nullopt};
            running_at[e.payload[0]] = e.payload[5];
        } else if (e.kind == sim::EventKind::VmReleased) {
            auto& m = machines[static_cast<std::size_t>(e.payload[2])];
            m.free_cpu += e.payload[3];
            m.free_mem += e.payload[4];
            live.erase(e.payload[0]);
        } else if (e.kind == sim::EventKind::ExecutionStarted) {
            live[e.payload[1]].assigned = RequestId{e.payload[0]};
        } else if (e.kind == sim::EventKind::ExecutionComplete) {
            if (live.contains(e.payload[1])) {
                live[e.payload[1]].assigned.reset();
            }
        }
    }
    VmAvailabilitySnapshot s;
    s.snapshot_time = at;
    s.machines = machines;
    for (auto& [id, v] : live) {
        v.state = at < running_at[id] ? VmState::Starting : VmState::Running;
        s.vms.push_back(v);
    }
    return s;
}

} // namespace

TEST_CASE("single machine placement") {
    sim::Engine eng;
    Datacenter dc(eng, 0, cpus({4}));
    auto vm = dc.provision_vm(std::nullopt, {1, 0}, 0);
    CHECK(dc.vm(vm).host == MachineId{0});
    CHECK(dc.vm_monitor_snapshot(0).machines[0].free_cpu == 3);
}

TEST_CASE("worst-fit picks the machine with the most free cpu") {
    // Free (2, 3, 1): enumerate placements of 2 cu; worst fit keeps the most
    // headroom on the chosen machine, i.e. the 3-cu one (index 1).
    sim::Engine eng;
    Datacenter dc(eng, 0, cpus({4, 4, 4}));
    dc.provision_vm(MachineId{0}, {2, 0}, 0);
    dc.provision_vm(MachineId{1}, {1, 0}, 0);
    dc.provision_vm(MachineId{2}, {3, 0}, 0);
    std::optional<MachineId> oracle;
    std::int64_t best_free = -1;
    for (const auto& m : dc.machines()) {
        if (m.free_cpu() >= 2 && m.free_cpu() > best_free) {
            best_free = m.free_cpu();
            oracle = m.id;
        }
    }
    auto vm = dc.provision_vm(std::nullopt, {2, 0}, 0);
    CHECK(dc.vm(vm).host == *oracle);
    CHECK(dc.vm(vm).host == MachineId{1});
}

TEST_CASE("best-fit and first-fit policies") {
    std::vector<PhysicalMachine> ms;
    for (std::int64_t i = 0; i < 3; ++i) {
        ms.push_back({MachineId{i}, {4, 100}, {}, {}});
    }
    ms[0].allocated.cpu = 2;
    ms[1].allocated.cpu = 1;
    ms[2].allocated.cpu = 3;
    CHECK(choose_machine(PlacementPolicy::BestFit, ms, {2, 0}) == MachineId{0});
    CHECK(choose_machine(PlacementPolicy::FirstFit, ms, {2, 0}) == MachineId{0});
    CHECK(choose_machine(PlacementPolicy::FirstFit, ms, {3, 0}) == MachineId{1});
    CHECK_FALSE(choose_machine(PlacementPolicy::WorstFit, ms, {4, 0}).has_value());
}

TEST_CASE("full datacenter reports insufficient capacity") {
    sim::Engine eng;
    Datacenter dc(eng, 0, cpus({2, 2}));
    dc.provision_vm(std::nullopt, {2, 0}, 0);
    dc.provision_vm(std::nullopt, {2, 0}, 0);
    CHECK_THROWS_AS(dc.provision_vm(std::nullopt, {1, 0}, 0), InsufficientCapacity);
    CHECK_THROWS_AS(dc.provision_vm(MachineId{0}, {1, 0}, 0), InsufficientCapacity);
    CHECK_THROWS_AS(dc.provision_vm(MachineId{7}, {1, 0}, 0), InsufficientCapacity);
}

TEST_CASE("memory is a capacity dimension too") {
    sim::Engine eng;
    Datacenter dc(eng, 0, {{8, 100}});
    dc.provision_vm(std::nullopt, {1, 80}, 0);
    CHECK_THROWS_AS(dc.provision_vm(std::nullopt, {1, 30}, 0), InsufficientCapacity);
}

TEST_CASE("release returns capacity immediately") {
    sim::Engine eng;
    Datacenter dc(eng, 0, cpus({4}));
    auto vm = dc.provision_vm(std::nullopt, {4, 0}, 0);
    CHECK(dc.release_vm(vm, 3) == Entitlement{4, 0});
    CHECK(dc.vm_monitor_snapshot(3).machines[0].free_cpu == 4);
    CHECK_NOTHROW(dc.provision_vm(std::nullopt, {4, 0}, 3));
    CHECK_THROWS_AS(dc.release_vm(vm, 3), AlreadyStopped);
    CHECK_THROWS_AS(dc.release_vm(VmId{42}, 3), UnknownVm);
}

TEST_CASE("fresh datacenter snapshot") {
    sim::Engine eng;
    Datacenter dc(eng, 0, cpus({4, 8}));
    auto s = dc.vm_monitor_snapshot(0);
    CHECK(s.free_cpu() == 12);
    CHECK(s.vms.empty());
    CHECK(s.cpu_utilization() == Rational{0});
}

TEST_CASE("dispatch completion arithmetic") {
    sim::Engine eng;
    Datacenter dc(eng, 0, cpus({4}));
    SimTime done = -1;
    eng.on(sim::EventKind::ExecutionComplete, [&](const sim::Event& e) { done = e.fire_at; });
    eng.run_until(10);
    auto vm = dc.provision_vm(std::nullopt, {4, 0}, 10);
    dc.dispatch(RequestId{1}, 100, vm, 10);
    eng.run_until(kNever);
    CHECK(done == 35);
    CHECK(execution_ticks(10, 4) == 3);
}

TEST_CASE("dispatch on a starting VM waits for boot") {
    sim::Engine eng;
    Datacenter dc(eng, 0, cpus({4}), 5);
    auto vm = dc.provision_vm(std::nullopt, {2, 0}, 0);
    CHECK(dc.vm_monitor_snapshot(0).vms[0].state == VmState::Starting);
    CHECK(dc.vm_monitor_snapshot(5).vms[0].state == VmState::Running);
    SimTime done = -1;
    eng.on(sim::EventKind::ExecutionComplete, [&](const sim::Event& e) { done = e.fire_at; });
    dc.dispatch(RequestId{1}, 10, vm, 0);
    eng.run_until(kNever);
    CHECK(done == 10);
}

TEST_CASE("one request per VM") {
    sim::Engine eng;
    Datacenter dc(eng, 0, cpus({4}));
    auto vm = dc.provision_vm(std::nullopt, {4, 0}, 0);
    dc.dispatch(RequestId{1}, 40, vm, 0);
    CHECK_THROWS_AS(dc.dispatch(RequestId{2}, 40, vm, 1), VmBusy);
    dc.finish_execution(vm);
    CHECK_NOTHROW(dc.dispatch(RequestId{2}, 40, vm, 10));
}

TEST_CASE("snapshot equals an independent trace fold under random lifecycles") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        sim::Engine eng;
        std::vector<sim::Event> trace;
        eng.add_observer([&](const sim::Event& e) { trace.push_back(e); });
        const auto fleet = cpus({4, 6, 8});
        Datacenter dc(eng, 3, fleet, static_cast<SimTime>(rng() % 3));
        eng.on(sim::EventKind::ExecutionComplete, [&](const sim::Event& e) {
            if (!dc.vm(VmId{e.payload[1]}).stopped) {
                dc.finish_execution(VmId{e.payload[1]});
            }
        });
        std::vector<VmId> live;
        std::int64_t job = 0;
        for (SimTime t = 0; t < 40; ++t) {
            eng.run_until(t);
            const auto op = rng() % 3;
            if (op == 0 || live.empty()) {
                try {
                    live.push_back(dc.provision_vm(std::nullopt, {1 + static_cast<std::int64_t>(rng() % 4), 10}, t));
                } catch (const InsufficientCapacity&) {
                }
            } else if (op == 1) {
                const auto i = rng() % live.size();
                dc.release_vm(live[i], t);
                live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
            } else {
                const auto& v = dc.vm(live[rng() % live.size()]);
                if (!v.assigned) {
                    dc.dispatch(RequestId{job++}, 1 + static_cast<std::int64_t>(rng() % 20), v.id, t);
                }
            }
            dc.check_invariants();
            CHECK(replay(trace, fleet, t) == dc.vm_monitor_snapshot(t));
        }
    }
}

TEST_CASE("capacity conservation: free plus allocated equals total") {
    sim::Engine eng;
    Datacenter dc(eng, 0, cpus({4, 4}));
    auto a = dc.provision_vm(std::nullopt, {3, 0}, 0);
    dc.provision_vm(std::nullopt, {2, 0}, 0);
    dc.release_vm(a, 0);
    auto s = dc.vm_monitor_snapshot(0);
    CHECK(s.free_cpu() + dc.allocated().cpu == dc.total_cpu());
}
