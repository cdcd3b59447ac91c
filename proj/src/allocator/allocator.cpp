#include <mocsim/allocator/allocator.hpp>

namespace mocsim::allocator {

Allocator::Allocator(AdmissionController admission, SimTime history_window, sim::Engine* engine,
                     std::int64_t provider)
    : admission_(std::move(admission)), history_window_(history_window), engine_(engine), provider_(provider) {}

LoadStats Allocator::load_stats(SimTime now) const {
    if (history_window_ <= 0) {
        return {};
    }
    return monitor_.historical_stats({now - history_window_, now});
}

AdmissionDecision Allocator::examine(const ServiceRequest& job, SimTime now,
                                     const datacenter::VmAvailabilitySnapshot& snapshot, const ExamineOptions& options,
                                     std::optional<RequestId> parent) {
    const auto decision = admission_.examine(job, now, snapshot, load_stats(now), options);
    monitor_.record_examination(now, decision.accepted(), snapshot.cpu_utilization());
    if (engine_ != nullptr) {
        const auto request = parent.value_or(job.id).value;
        if (decision.accepted()) {
            const auto& a = decision.accept();
            engine_->emit(sim::EventKind::JobAdmitted, {job.id.value, provider_, a.quoted_price.micros(),
                                                        a.promised_completion, job.workload_volume, request});
        } else {
            engine_->emit(sim::EventKind::JobRejected,
                          {job.id.value, provider_, static_cast<std::int64_t>(decision.reason())});
        }
    }
    return decision;
}

void Allocator::commit(const ServiceRequest& job, const Accept& accept) {
    admission_.commit(job.id, accept.vm_plan);
    accounting_.open(job.id, job.consumer, accept.quoted_price, job.workload_volume);
    monitor_.admitted(job.id, job.workload_volume, accept.promised_completion);
}

Invoice Allocator::finalize_charge(RequestId job) {
    const auto state = monitor_.progress(job, kNever - 1).state;
    return accounting_.finalize_charge(job, state);
}

} // namespace mocsim::allocator
