#pragma once

#include <mocsim/allocator/accounting.hpp>
#include <mocsim/allocator/admission.hpp>
#include <mocsim/allocator/monitor.hpp>
#include <mocsim/allocator/pricing.hpp>
#include <mocsim/sim/engine.hpp>

namespace mocsim::allocator {

/// One provider's resource allocator: examiner, admission control, pricing,
/// accounting and request monitor behind a single interface.
///
/// With an engine attached, each examination emits JobAdmitted or JobRejected.
class Allocator {
public:
    Allocator(AdmissionController admission, SimTime history_window = 0, sim::Engine* engine = nullptr,
              std::int64_t provider = 0);

    /// `parent` is the consumer request a job serves; defaults to the job itself.
    AdmissionDecision examine(const ServiceRequest& job, SimTime now, const datacenter::VmAvailabilitySnapshot& snapshot,
                              const ExamineOptions& options = {}, std::optional<RequestId> parent = std::nullopt);

    /// Binds an accepted decision: calendar, usage account, monitor.
    void commit(const ServiceRequest& job, const Accept& accept);

    std::int64_t meter(const UsageRecord& usage) { return accounting_.meter(usage); }
    Invoice finalize_charge(RequestId job);
    [[nodiscard]] ProgressReport progress(RequestId job, SimTime at) const { return monitor_.progress(job, at); }
    [[nodiscard]] LoadStats historical_stats(Interval window) const { return monitor_.historical_stats(window); }

    /// Stats fed to admission at `now`; empty when history is disabled.
    [[nodiscard]] LoadStats load_stats(SimTime now) const;

    [[nodiscard]] AdmissionController& admission() noexcept { return admission_; }
    [[nodiscard]] const AdmissionController& admission() const noexcept { return admission_; }
    [[nodiscard]] Accounting& accounting() noexcept { return accounting_; }
    [[nodiscard]] const Accounting& accounting() const noexcept { return accounting_; }
    [[nodiscard]] RequestMonitor& monitor() noexcept { return monitor_; }
    [[nodiscard]] const RequestMonitor& monitor() const noexcept { return monitor_; }

private:
    AdmissionController admission_;
    Accounting accounting_;
    RequestMonitor monitor_;
    SimTime history_window_;
    sim::Engine* engine_;
    std::int64_t provider_;
};

} // namespace mocsim::allocator
