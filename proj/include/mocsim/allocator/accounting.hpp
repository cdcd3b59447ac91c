#pragma once

#include <mocsim/allocator/monitor.hpp>
#include <mocsim/core/types.hpp>

#include <map>
#include <vector>

namespace mocsim::allocator {

struct UsageRecord {
    RequestId request;
    VmId vm;
    Interval interval;
    std::int64_t cu_ticks = 0;

    friend bool operator==(const UsageRecord&, const UsageRecord&) = default;
};

/// cu_ticks at `rate` µ¤ per cu-tick.
struct InvoiceLine {
    Interval interval;
    std::int64_t cu_ticks = 0;
    Rational rate;

    friend bool operator==(const InvoiceLine&, const InvoiceLine&) = default;
};

struct Invoice {
    RequestId request;
    ParticipantId buyer;
    std::vector<InvoiceLine> lines;
    Money quoted;
    Money total;
    JobState status = JobState::Queued;
    std::int64_t workload_volume = 0;

    friend bool operator==(const Invoice&, const Invoice&) = default;
};

/// Charge for `cu_ticks` of a job quoted at `quoted` for `workload_volume`:
/// round_half_up(cu_ticks * quoted / workload_volume), never above `quoted`.
[[nodiscard]] Money usage_charge(std::int64_t cu_ticks, Money quoted, std::int64_t workload_volume);

/// Usage ledger per admitted job and the final invoice.
class Accounting {
public:
    void open(RequestId request, ParticipantId buyer, Money quoted, std::int64_t workload_volume);

    /// Returns the accumulated cu-ticks for the request.
    std::int64_t meter(const UsageRecord& usage);

    [[nodiscard]] std::int64_t accumulated(RequestId request) const;
    [[nodiscard]] const std::vector<UsageRecord>& usage(RequestId request) const;
    [[nodiscard]] bool is_open(RequestId request) const noexcept { return accounts_.contains(request); }

    /// `status` must be Completed or Failed. A second call returns the same invoice.
    Invoice finalize_charge(RequestId request, JobState status);

private:
    struct Account {
        ParticipantId buyer;
        Money quoted;
        std::int64_t volume = 0;
        std::int64_t accumulated = 0;
        std::vector<UsageRecord> records;
        std::map<SimTime, SimTime> intervals; ///< begin -> end
        std::optional<Invoice> invoice;
    };

    Account& account(RequestId request);
    [[nodiscard]] const Account& account(RequestId request) const;

    std::map<RequestId, Account> accounts_;
};

} // namespace mocsim::allocator
