#pragma once

#include <mocsim/allocator/accounting.hpp>
#include <mocsim/exchange/directory.hpp>
#include <mocsim/exchange/ledger.hpp>
#include <mocsim/sim/event.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mocsim::metrics {

/// Reason codes carried by RequestRejected records. The first three mirror
/// the admission reasons.
enum class RequestRejection : std::int64_t {
    DeadlineInfeasible = 0,
    BudgetInfeasible = 1,
    CapacityUnavailable = 2,
    NoBrokerAvailable = 3,
    ProcurementFailed = 4,
};

[[nodiscard]] std::string to_string(RequestRejection r);

struct Party {
    ParticipantId id;
    exchange::ParticipantRole role = exchange::ParticipantRole::Provider;
    std::string name;
};

/// Who owns each ledger account, and the fleet size for utilization.
struct Roster {
    std::map<AccountId, Party> accounts; ///< every account except the external one
    std::int64_t total_cpu = 0;
};

struct RunSummary {
    std::string scenario_digest;
    std::uint64_t seed = 0;
    std::string mode;

    std::int64_t submitted = 0;
    std::int64_t accepted = 0;
    std::int64_t rejected = 0;
    std::int64_t completed = 0;
    std::int64_t failed = 0;
    std::int64_t violated = 0; ///< completed late or failed
    std::int64_t in_flight = 0; ///< accepted but unfinished when the run stopped
    std::map<std::int64_t, std::int64_t> rejections_by_reason;

    std::map<ParticipantId, Money> provider_revenue; ///< non-funding inflows minus outflows
    Money revenue_total;
    std::map<ParticipantId, Money> broker_utility;
    Money penalty_total;
    Money mean_price; ///< accepted price per cu-tick, volume-weighted
    Rational mean_utilization{0};

    std::int64_t slas_formed = 0;
    std::int64_t slas_settled = 0;
    std::int64_t auction_rounds = 0;
    std::int64_t traded_quantity = 0;
    std::vector<std::pair<SimTime, Money>> price_series; ///< auction clearing prices

    SimTime final_clock = 0;
    std::uint64_t records = 0;

    /// accepted >= completed + failed + in_flight, counters non-negative.
    /// Throws InvariantViolation.
    void check() const;

    friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

/// Job-level facts seen in the trace, kept for the invoice cross-check.
struct JobRecord {
    Money quoted;
    std::int64_t volume = 0;
    std::int64_t cu_ticks = 0;
    bool finalized = false;
    Money invoice_total;
};

/// Folds trace records into run aggregates. Each aggregate is a pure function
/// of the records seen so far.
class Collector {
public:
    explicit Collector(Roster roster) : roster_(std::move(roster)) {}

    /// Throws OutOfOrderEvent when time goes backwards or a seq repeats.
    void record(const sim::Event& e);

    /// Aggregates as of `end` (utilization is averaged over [0, end)).
    [[nodiscard]] RunSummary summary(SimTime end) const;

    [[nodiscard]] const Roster& roster() const noexcept { return roster_; }
    [[nodiscard]] const std::map<RequestId, JobRecord>& jobs() const noexcept { return jobs_; }
    [[nodiscard]] const std::vector<sim::Event>& transfers() const noexcept { return transfers_; }
    [[nodiscard]] std::uint64_t records() const noexcept { return records_; }

private:
    void allocate(SimTime at, std::int64_t delta);

    Roster roster_;
    std::uint64_t records_ = 0;
    SimTime last_time_ = 0;
    std::optional<sim::EventId> last_seq_;

    RunSummary totals_;
    Wide price_sum_ = 0;
    Wide volume_sum_ = 0;
    std::map<AccountId, Money> flows_;

    std::int64_t allocated_ = 0;
    SimTime allocated_since_ = 0;
    Wide area_ = 0;

    std::map<RequestId, JobRecord> jobs_;
    std::vector<sim::Event> transfers_;
};

/// Values produced by the allocators and the ledger, checked against the trace.
struct CrossCheckInput {
    std::vector<exchange::LedgerEntry> journal;
    std::vector<exchange::LedgerAccount> accounts;
    std::vector<allocator::Invoice> invoices;
};

/// Recomputes every invoice from metered usage and every final balance from
/// the journal, and matches the journal against the Transfer records.
/// Throws CrossCheckFailure naming the first mismatch.
void cross_check(const Collector& collector, const CrossCheckInput& input);

/// Metadata written at the top of the summary document.
struct ReportHeader {
    std::string tool = "mocsim";
    std::string normalized_scenario; ///< JSON text
    std::string request_digest;
    std::string trace_hash;
};

enum class ReportFormat { Table, SummaryDocument };

/// Runs the cross-check, then serializes. Byte output depends only on the inputs.
[[nodiscard]] std::string report(const Collector& collector, const CrossCheckInput& input, const RunSummary& summary,
                                 ReportFormat format, const ReportHeader& header = {});

/// `metric,subject,value` rows.
[[nodiscard]] std::string render_table(const RunSummary& summary);

/// JSON document with the header and the summary.
[[nodiscard]] std::string render_summary_document(const RunSummary& summary, const ReportHeader& header);

/// `index,time,from,to,amount,reason,sla_id` rows; accounts by name.
[[nodiscard]] std::string render_journal(const std::vector<exchange::LedgerEntry>& journal,
                                         const std::vector<exchange::LedgerAccount>& accounts);

} // namespace mocsim::metrics
