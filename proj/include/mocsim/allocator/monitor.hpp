#pragma once

#include <mocsim/allocator/admission.hpp>

#include <map>
#include <string_view>
#include <vector>

namespace mocsim::allocator {

enum class JobState : std::uint8_t { Queued, Executing, Completed, Failed };

[[nodiscard]] std::string_view to_string(JobState s) noexcept;

struct ProgressReport {
    RequestId request;
    JobState state = JobState::Queued;
    Rational fraction_done{0};
    SimTime expected_completion = 0;

    friend bool operator==(const ProgressReport&, const ProgressReport&) = default;
};

/// Tracks job execution and keeps the examination/lateness history that feeds admission.
class RequestMonitor {
public:
    void admitted(RequestId job, std::int64_t workload_volume, SimTime promised);
    void dispatched(RequestId job, SimTime start, std::int64_t cpu_entitlement);
    void completed(RequestId job, SimTime at);
    void failed(RequestId job, SimTime at);

    [[nodiscard]] ProgressReport progress(RequestId job, SimTime at) const;
    [[nodiscard]] bool known(RequestId job) const noexcept { return jobs_.contains(job); }
    [[nodiscard]] SimTime promised(RequestId job) const;

    void record_examination(SimTime at, bool accepted, Rational utilization);

    /// Statistics over events with time in `window`.
    [[nodiscard]] LoadStats historical_stats(Interval window) const;

private:
    struct Job {
        std::int64_t volume = 0;
        SimTime promised = 0;
        std::optional<SimTime> start;
        std::int64_t entitlement = 0;
        std::optional<SimTime> completed_at;
        std::optional<SimTime> failed_at;
    };
    struct Examination {
        SimTime at;
        bool accepted;
        Rational utilization;
    };
    struct Completion {
        SimTime at;
        SimTime lateness;
    };

    const Job& job(RequestId id) const;
    Job& job(RequestId id);

    std::map<RequestId, Job> jobs_;
    std::vector<Examination> examinations_;
    std::vector<Completion> completions_;
};

} // namespace mocsim::allocator
