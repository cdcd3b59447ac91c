#include <mocsim/allocator/monitor.hpp>

#include <mocsim/core/error.hpp>

#include <string>

namespace mocsim::allocator {

std::string_view to_string(JobState s) noexcept {
    switch (s) {
    case JobState::Queued:
        return "Queued";
    case JobState::Executing:
        return "Executing";
    case JobState::Completed:
        return "Completed";
    case JobState::Failed:
        return "Failed";
    }
    return "?";
}

const RequestMonitor::Job& RequestMonitor::job(RequestId id) const {
    auto it = jobs_.find(id);
    if (it == jobs_.end()) {
        throw UnknownRequest("request " + std::to_string(id.value));
    }
    return it->second;
}

RequestMonitor::Job& RequestMonitor::job(RequestId id) {
    return const_cast<Job&>(std::as_const(*this).job(id));
}

void RequestMonitor::admitted(RequestId id, std::int64_t workload_volume, SimTime promised) {
    jobs_[id] = Job{workload_volume, promised, std::nullopt, 0, std::nullopt, std::nullopt};
}

void RequestMonitor::dispatched(RequestId id, SimTime start, std::int64_t cpu_entitlement) {
    auto& j = job(id);
    j.start = start;
    j.entitlement = cpu_entitlement;
}

void RequestMonitor::completed(RequestId id, SimTime at) {
    auto& j = job(id);
    j.completed_at = at;
    completions_.push_back({at, std::max<SimTime>(0, at - j.promised)});
}

void RequestMonitor::failed(RequestId id, SimTime at) { job(id).failed_at = at; }

SimTime RequestMonitor::promised(RequestId id) const { return job(id).promised; }

ProgressReport RequestMonitor::progress(RequestId id, SimTime at) const {
    const auto& j = job(id);
    ProgressReport r;
    r.request = id;
    const auto fraction = [&](SimTime t) {
        if (!j.start || t <= *j.start) {
            return Rational{0};
        }
        const Rational f{static_cast<std::int64_t>(
                             std::min<Wide>(Wide{t - *j.start} * j.entitlement, Wide{j.volume})),
                         j.volume};
        return f;
    };
    if (j.start) {
        r.expected_completion = *j.start + static_cast<SimTime>(ceil_div(j.volume, j.entitlement));
    } else {
        r.expected_completion = j.promised;
    }
    if (j.completed_at && at >= *j.completed_at) {
        r.state = JobState::Completed;
        r.fraction_done = 1;
        r.expected_completion = *j.completed_at;
    } else if (j.failed_at && at >= *j.failed_at) {
        r.state = JobState::Failed;
        r.fraction_done = fraction(*j.failed_at);
    } else if (!j.start || at < *j.start) {
        r.state = JobState::Queued;
        r.fraction_done = 0;
    } else {
        r.state = JobState::Executing;
        r.fraction_done = fraction(at);
    }
    return r;
}

void RequestMonitor::record_examination(SimTime at, bool accepted, Rational utilization) {
    examinations_.push_back({at, accepted, utilization});
}

LoadStats RequestMonitor::historical_stats(Interval window) const {
    LoadStats s;
    std::int64_t examined = 0;
    std::int64_t accepted = 0;
    Rational util_sum{0};
    for (const auto& e : examinations_) {
        if (!window.contains(e.at)) {
            continue;
        }
        ++examined;
        accepted += e.accepted ? 1 : 0;
        util_sum += e.utilization;
    }
    if (examined > 0) {
        s.acceptance_rate = Rational{accepted, examined};
        s.mean_utilization = util_sum / examined;
    }
    std::int64_t n = 0;
    std::int64_t late_sum = 0;
    for (const auto& c : completions_) {
        if (window.contains(c.at)) {
            ++n;
            late_sum += c.lateness;
        }
    }
    if (n > 0) {
        s.mean_lateness = Rational{late_sum, n};
    }
    return s;
}

} // namespace mocsim::allocator
