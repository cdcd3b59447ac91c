#include <mocsim/allocator/accounting.hpp>

#include <mocsim/core/error.hpp>

#include <stdexcept>
#include <string>

namespace mocsim::allocator {

Money usage_charge(std::int64_t cu_ticks, Money quoted, std::int64_t workload_volume) {
    if (workload_volume <= 0) {
        throw std::invalid_argument("workload volume must be positive");
    }
    const Money raw{round_half_up(Wide{cu_ticks} * quoted.micros(), workload_volume)};
    return min(raw, quoted);
}

Accounting::Account& Accounting::account(RequestId request) {
    return const_cast<Account&>(std::as_const(*this).account(request));
}

const Accounting::Account& Accounting::account(RequestId request) const {
    auto it = accounts_.find(request);
    if (it == accounts_.end()) {
        throw UnknownRequest("no usage account for request " + std::to_string(request.value));
    }
    return it->second;
}

void Accounting::open(RequestId request, ParticipantId buyer, Money quoted, std::int64_t workload_volume) {
    if (workload_volume <= 0 || quoted < Money{0}) {
        throw std::invalid_argument("usage account needs positive volume and non-negative price");
    }
    if (accounts_.contains(request)) {
        throw InvariantViolation("usage account for request " + std::to_string(request.value) + " already open");
    }
    Account a;
    a.buyer = buyer;
    a.quoted = quoted;
    a.volume = workload_volume;
    accounts_.emplace(request, std::move(a));
}

std::int64_t Accounting::meter(const UsageRecord& usage) {
    auto& a = account(usage.request);
    if (usage.cu_ticks < 0 || usage.interval.end < usage.interval.begin) {
        throw std::invalid_argument("usage record must have a forward interval and non-negative cu-ticks");
    }
    auto next = a.intervals.lower_bound(usage.interval.begin);
    const bool clash_next = next != a.intervals.end() && next->first < usage.interval.end;
    const bool clash_same = next != a.intervals.end() && next->first == usage.interval.begin;
    bool clash_prev = false;
    if (next != a.intervals.begin()) {
        clash_prev = std::prev(next)->second > usage.interval.begin;
    }
    if (clash_next || clash_same || clash_prev) {
        throw OverlappingInterval("request " + std::to_string(usage.request.value) + " already metered [" +
                                  std::to_string(usage.interval.begin) + "," + std::to_string(usage.interval.end) +
                                  ")");
    }
    if (a.accumulated + usage.cu_ticks > a.volume) {
        throw InvariantViolation("request " + std::to_string(usage.request.value) + " metered beyond its volume");
    }
    a.intervals.emplace(usage.interval.begin, usage.interval.end);
    a.records.push_back(usage);
    a.accumulated += usage.cu_ticks;
    return a.accumulated;
}

std::int64_t Accounting::accumulated(RequestId request) const { return account(request).accumulated; }

const std::vector<UsageRecord>& Accounting::usage(RequestId request) const { return account(request).records; }

Invoice Accounting::finalize_charge(RequestId request, JobState status) {
    auto& a = account(request);
    if (status != JobState::Completed && status != JobState::Failed) {
        throw RequestNotFinished("request " + std::to_string(request.value) + " is " + std::string{to_string(status)});
    }
    if (a.invoice) {
        return *a.invoice;
    }
    if (status == JobState::Completed && a.accumulated != a.volume) {
        throw InvariantViolation("completed request " + std::to_string(request.value) + " metered " +
                                 std::to_string(a.accumulated) + " of " + std::to_string(a.volume));
    }
    Invoice inv;
    inv.request = request;
    inv.buyer = a.buyer;
    inv.quoted = a.quoted;
    inv.status = status;
    inv.workload_volume = a.volume;
    const Rational rate{a.quoted.micros(), a.volume};
    for (const auto& r : a.records) {
        inv.lines.push_back({r.interval, r.cu_ticks, rate});
    }
    inv.total = usage_charge(a.accumulated, a.quoted, a.volume);
    a.invoice = inv;
    return inv;
}

} // namespace mocsim::allocator
