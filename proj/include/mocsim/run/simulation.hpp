#pragma once

#include <mocsim/allocator/accounting.hpp>
#include <mocsim/exchange/ledger.hpp>
#include <mocsim/exchange/reservation.hpp>
#include <mocsim/exchange/settlement.hpp>
#include <mocsim/metrics/metrics.hpp>
#include <mocsim/negotiation/negotiation.hpp>
#include <mocsim/workload/scenario.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mocsim::run {

struct RunOptions {
    std::optional<std::uint64_t> seed;    ///< overrides master_seed
    std::optional<workload::Mode> mode;   ///< overrides the scenario mode
    std::ostream* trace_sink = nullptr;   ///< receives trace lines as they are produced
};

struct ClearingRow {
    SimTime round_time = 0;
    OrderId bid;
    OrderId ask;
    std::int64_t quantity = 0;
    Money clearing_price;

    friend bool operator==(const ClearingRow&, const ClearingRow&) = default;
};

/// A provider job with the invoice it produced.
struct InvoiceRow {
    allocator::Invoice invoice;
    ParticipantId provider;
    RequestId parent; ///< consumer request the job served

    friend bool operator==(const InvoiceRow&, const InvoiceRow&) = default;
};

struct RunResult {
    std::uint64_t seed = 0;
    workload::Mode mode = workload::Mode::Market;
    std::string scenario_digest;
    std::string normalized_scenario;
    std::uint64_t request_digest = 0;
    std::size_t request_count = 0;
    std::uint64_t trace_hash = 0;
    std::uint64_t trace_lines = 0;
    SimTime final_clock = 0;

    metrics::RunSummary summary;
    std::vector<exchange::LedgerEntry> journal;
    std::vector<exchange::LedgerAccount> accounts;
    std::vector<InvoiceRow> invoices;
    std::vector<ClearingRow> clearing;
    std::vector<negotiation::Sla> slas;
    std::vector<exchange::Settlement> settlements;
    std::vector<exchange::Reservation> reservations;

    /// Summary document, metrics table and journal, all cross-checked.
    std::string summary_document;
    std::string metrics_table;
    std::string journal_table;
};

/// Run one simulation of `scenario` to the horizon (or until drained).
///
/// Market mode routes each request either directly to providers (cheapest
/// listed first) or through the consumer's chosen brokers, which procure by
/// negotiation or through the periodic call auction. Baseline mode admits
/// FIFO at the fixed baseline rate on the provider with the earliest start.
/// Throws InvariantViolation or CrossCheckFailure on internal inconsistency.
[[nodiscard]] RunResult run_scenario(const workload::Scenario& scenario, const RunOptions& options = {});

/// `request_id,consumer,submit_time,workload_volume,cpu_need,mem_need,deadline,budget,reliability_class,security_class`
[[nodiscard]] std::string render_requests(const std::vector<allocator::ServiceRequest>& requests);

/// `job,request,provider,buyer,quoted,total,status`
[[nodiscard]] std::string render_invoices(const std::vector<InvoiceRow>& invoices);

/// `round_time,bid_id,ask_id,quantity,clearing_price`
[[nodiscard]] std::string render_clearing(const std::vector<ClearingRow>& rows);

} // namespace mocsim::run
