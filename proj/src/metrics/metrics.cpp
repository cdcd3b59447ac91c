#include <mocsim/metrics/metrics.hpp>

#include <mocsim/core/error.hpp>

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace mocsim::metrics {

using sim::EventKind;

void RunSummary::check() const {
    if (submitted < 0 || accepted < 0 || rejected < 0 || completed < 0 || failed < 0 || in_flight < 0) {
        throw InvariantViolation("negative run counter");
    }
    if (accepted < completed + failed + in_flight) {
        throw InvariantViolation("more requests finished than were accepted");
    }
    if (accepted + rejected > submitted) {
        throw InvariantViolation("more decisions than submitted requests");
    }
}

void Collector::allocate(SimTime at, std::int64_t delta) {
    area_ += Wide{allocated_} * (at - allocated_since_);
    allocated_since_ = at;
    allocated_ += delta;
}

void Collector::record(const sim::Event& e) {
    if (records_ > 0 && (e.fire_at < last_time_ || e.seq == *last_seq_)) {
        throw OutOfOrderEvent("record at " + std::to_string(e.fire_at) + " seq " + std::to_string(e.seq) +
                              " after time " + std::to_string(last_time_));
    }
    ++records_;
    last_time_ = e.fire_at;
    last_seq_ = e.seq;
    const auto& f = e.payload.f;

    switch (e.kind) {
    case EventKind::RequestSubmitted:
        ++totals_.submitted;
        break;
    case EventKind::RequestAccepted:
        ++totals_.accepted;
        price_sum_ += f[2];
        volume_sum_ += f[4];
        break;
    case EventKind::RequestRejected:
        ++totals_.rejected;
        ++totals_.rejections_by_reason[f[1]];
        break;
    case EventKind::RequestCompleted:
        ++totals_.completed;
        if (f[1] > f[2]) {
            ++totals_.violated;
        }
        break;
    case EventKind::RequestFailed:
        ++totals_.failed;
        ++totals_.violated;
        break;
    case EventKind::SlaFormed:
        ++totals_.slas_formed;
        break;
    case EventKind::SlaSettled:
        ++totals_.slas_settled;
        totals_.penalty_total += Money{f[2]};
        break;
    case EventKind::VmProvisioned:
        allocate(e.fire_at, f[3]);
        break;
    case EventKind::VmReleased:
        allocate(e.fire_at, -f[3]);
        break;
    case EventKind::JobAdmitted: {
        auto& j = jobs_[RequestId{f[0]}];
        j.quoted = Money{f[2]};
        j.volume = f[4];
        break;
    }
    case EventKind::UsageMetered:
        jobs_[RequestId{f[0]}].cu_ticks += f[4];
        break;
    case EventKind::InvoiceFinalized: {
        auto& j = jobs_[RequestId{f[0]}];
        j.finalized = true;
        j.invoice_total = Money{f[2]};
        break;
    }
    case EventKind::Transfer: {
        transfers_.push_back(e);
        const auto reason = static_cast<exchange::TransferReason>(f[3]);
        if (reason != exchange::TransferReason::Funding) {
            flows_[AccountId{f[1]}] += Money{f[2]};
            flows_[AccountId{f[0]}] -= Money{f[2]};
        }
        break;
    }
    case EventKind::AuctionCleared:
        ++totals_.auction_rounds;
        totals_.traded_quantity += f[2];
        if (f[3] >= 0) {
            totals_.price_series.emplace_back(e.fire_at, Money{f[3]});
        }
        break;
    default:
        break;
    }
}

RunSummary Collector::summary(SimTime end) const {
    RunSummary s = totals_;
    s.in_flight = s.accepted - s.completed - s.failed;
    s.final_clock = end;
    s.records = records_;
    for (const auto& [account, party] : roster_.accounts) {
        const auto it = flows_.find(account);
        const Money net = it == flows_.end() ? Money{0} : it->second;
        if (party.role == exchange::ParticipantRole::Provider) {
            s.provider_revenue[party.id] = net;
            s.revenue_total += net;
        } else if (party.role == exchange::ParticipantRole::Broker) {
            s.broker_utility[party.id] = net;
        }
    }
    if (volume_sum_ > 0) {
        s.mean_price = Money{round_half_up(price_sum_, volume_sum_)};
    }
    const Wide area = area_ + Wide{allocated_} * std::max<SimTime>(0, end - allocated_since_);
    const Wide capacity = Wide{roster_.total_cpu} * end;
    if (capacity > 0) {
        // Reduce in wide arithmetic before narrowing into the rational.
        Wide a = area;
        Wide b = capacity;
        while (b != 0) {
            const Wide t = a % b;
            a = b;
            b = t;
        }
        const Wide g = a == 0 ? 1 : a;
        s.mean_utilization = Rational{narrow(area / g), narrow(capacity / g)};
    }
    return s;
}

void cross_check(const Collector& collector, const CrossCheckInput& input) {
    const auto& transfers = collector.transfers();
    if (transfers.size() != input.journal.size()) {
        throw CrossCheckFailure("journal has " + std::to_string(input.journal.size()) + " rows but the trace has " +
                                std::to_string(transfers.size()) + " transfers");
    }
    for (std::size_t i = 0; i < transfers.size(); ++i) {
        const auto& f = transfers[i].payload.f;
        const auto& row = input.journal[i];
        const bool same = row.index == static_cast<std::size_t>(f[5]) && row.time == transfers[i].fire_at &&
                          row.from.value == f[0] && row.to.value == f[1] && row.amount.micros() == f[2] &&
                          static_cast<std::int64_t>(row.reason) == f[3] && (row.sla ? row.sla->value : -1) == f[4];
        if (!same) {
            throw CrossCheckFailure("journal row " + std::to_string(i) + " differs from the traced transfer");
        }
    }

    std::map<AccountId, Money> replay;
    for (const auto& row : input.journal) {
        if (row.amount <= Money{0}) {
            throw CrossCheckFailure("journal row " + std::to_string(row.index) + " has a non-positive amount");
        }
        replay[row.from] -= row.amount;
        replay[row.to] += row.amount;
    }
    Money total{0};
    for (const auto& account : input.accounts) {
        const auto it = replay.find(account.id);
        const Money expected = it == replay.end() ? Money{0} : it->second;
        if (expected != account.balance) {
            throw CrossCheckFailure("account " + account.name + " balance " + std::to_string(account.balance.micros()) +
                                    " but the journal gives " + std::to_string(expected.micros()));
        }
        total += expected;
    }
    for (const auto& [id, balance] : replay) {
        const bool known = std::any_of(input.accounts.begin(), input.accounts.end(),
                                       [&](const auto& a) { return a.id == id; });
        if (!known) {
            throw CrossCheckFailure("journal moves money through unknown account " + std::to_string(id.value));
        }
    }
    if (total != Money{0}) {
        throw CrossCheckFailure("balances do not sum to zero");
    }

    std::size_t finalized = 0;
    for (const auto& [job, rec] : collector.jobs()) {
        finalized += rec.finalized ? 1 : 0;
    }
    if (finalized != input.invoices.size()) {
        throw CrossCheckFailure(std::to_string(input.invoices.size()) + " invoices but " + std::to_string(finalized) +
                                " finalized in the trace");
    }
    for (const auto& inv : input.invoices) {
        const auto it = collector.jobs().find(inv.request);
        if (it == collector.jobs().end() || !it->second.finalized) {
            throw CrossCheckFailure("invoice for job " + std::to_string(inv.request.value) + " is not in the trace");
        }
        const JobRecord& rec = it->second;
        if (rec.volume <= 0) {
            throw CrossCheckFailure("job " + std::to_string(inv.request.value) + " has no admitted volume");
        }
        const Money usage_total{round_half_up(Wide{rec.cu_ticks} * rec.quoted.micros(), rec.volume)};
        const Money expected = usage_total < rec.quoted ? usage_total : rec.quoted;
        Rational line_sum{0};
        for (const auto& line : inv.lines) {
            line_sum += line.rate * line.cu_ticks;
        }
        const Money from_lines{
            std::min(rec.quoted.micros(), round_half_up(line_sum.numerator(), line_sum.denominator()))};
        if (inv.total != expected || rec.invoice_total != expected || from_lines != expected ||
            inv.quoted != rec.quoted) {
            throw CrossCheckFailure("invoice for job " + std::to_string(inv.request.value) + " totals " +
                                    std::to_string(inv.total.micros()) + ", recomputed " +
                                    std::to_string(expected.micros()));
        }
    }
}

std::string to_string(RequestRejection r) {
    switch (r) {
    case RequestRejection::DeadlineInfeasible:
        return "deadline_infeasible";
    case RequestRejection::BudgetInfeasible:
        return "budget_infeasible";
    case RequestRejection::CapacityUnavailable:
        return "capacity_unavailable";
    case RequestRejection::NoBrokerAvailable:
        return "no_broker_available";
    case RequestRejection::ProcurementFailed:
        return "procurement_failed";
    }
    return "unknown";
}

namespace {

std::string reason_name(std::int64_t code) {
    if (code < 0 || code > static_cast<std::int64_t>(RequestRejection::ProcurementFailed)) {
        return "reason-" + std::to_string(code);
    }
    return to_string(static_cast<RequestRejection>(code));
}

void row(std::ostringstream& out, std::string_view metric, std::string_view subject, const std::string& value) {
    out << metric << ',' << subject << ',' << value << '\n';
}

std::string money(Money m) { return std::to_string(m.micros()); }

} // namespace

std::string render_table(const RunSummary& s) {
    std::ostringstream out;
    out << "metric,subject,value\n";
    row(out, "requests_submitted", "all", std::to_string(s.submitted));
    row(out, "requests_accepted", "all", std::to_string(s.accepted));
    row(out, "requests_rejected", "all", std::to_string(s.rejected));
    row(out, "requests_completed", "all", std::to_string(s.completed));
    row(out, "requests_failed", "all", std::to_string(s.failed));
    row(out, "requests_violated", "all", std::to_string(s.violated));
    row(out, "requests_in_flight", "all", std::to_string(s.in_flight));
    for (const auto& [reason, n] : s.rejections_by_reason) {
        row(out, "rejections", reason_name(reason), std::to_string(n));
    }
    row(out, "revenue", "all", money(s.revenue_total));
    for (const auto& [id, m] : s.provider_revenue) {
        row(out, "revenue", "provider-" + std::to_string(id.value), money(m));
    }
    for (const auto& [id, m] : s.broker_utility) {
        row(out, "broker_utility", "broker-" + std::to_string(id.value), money(m));
    }
    row(out, "penalty_total", "all", money(s.penalty_total));
    row(out, "mean_price", "per_cu_tick", money(s.mean_price));
    row(out, "mean_utilization", "cpu", to_decimal(s.mean_utilization));
    row(out, "slas_formed", "all", std::to_string(s.slas_formed));
    row(out, "slas_settled", "all", std::to_string(s.slas_settled));
    row(out, "auction_rounds", "all", std::to_string(s.auction_rounds));
    row(out, "traded_quantity", "cu_ticks", std::to_string(s.traded_quantity));
    row(out, "final_clock", "ticks", std::to_string(s.final_clock));
    return out.str();
}

std::string render_summary_document(const RunSummary& s, const ReportHeader& header) {
    nlohmann::ordered_json h;
    h["tool"] = header.tool;
    h["seed"] = s.seed;
    h["mode"] = s.mode;
    h["scenario_digest"] = s.scenario_digest;
    h["request_digest"] = header.request_digest;
    h["trace_hash"] = header.trace_hash;
    h["scenario"] = header.normalized_scenario.empty() ? nlohmann::ordered_json(nullptr)
                                                        : nlohmann::ordered_json::parse(header.normalized_scenario);

    nlohmann::ordered_json r;
    r["submitted"] = s.submitted;
    r["accepted"] = s.accepted;
    r["rejected"] = s.rejected;
    r["completed"] = s.completed;
    r["failed"] = s.failed;
    r["violated"] = s.violated;
    r["in_flight"] = s.in_flight;
    nlohmann::ordered_json reasons = nlohmann::ordered_json::object();
    for (const auto& [reason, n] : s.rejections_by_reason) {
        reasons[reason_name(reason)] = n;
    }
    r["rejections_by_reason"] = reasons;
    r["revenue_total"] = s.revenue_total.micros();
    nlohmann::ordered_json revenue = nlohmann::ordered_json::object();
    for (const auto& [id, m] : s.provider_revenue) {
        revenue[std::to_string(id.value)] = m.micros();
    }
    r["revenue_per_provider"] = revenue;
    nlohmann::ordered_json utility = nlohmann::ordered_json::object();
    for (const auto& [id, m] : s.broker_utility) {
        utility[std::to_string(id.value)] = m.micros();
    }
    r["utility_per_broker"] = utility;
    r["penalty_total"] = s.penalty_total.micros();
    r["mean_price"] = s.mean_price.micros();
    r["mean_utilization"] = mocsim::to_string(s.mean_utilization);
    r["slas_formed"] = s.slas_formed;
    r["slas_settled"] = s.slas_settled;
    r["auction_rounds"] = s.auction_rounds;
    r["traded_quantity"] = s.traded_quantity;
    nlohmann::ordered_json series = nlohmann::ordered_json::array();
    for (const auto& [t, p] : s.price_series) {
        series.push_back({t, p.micros()});
    }
    r["price_series"] = series;
    r["final_clock"] = s.final_clock;
    r["records"] = s.records;

    nlohmann::ordered_json doc;
    doc["header"] = h;
    doc["summary"] = r;
    doc["cross_check"] = "passed";
    return doc.dump(2) + "\n";
}

std::string report(const Collector& collector, const CrossCheckInput& input, const RunSummary& summary,
                   ReportFormat format, const ReportHeader& header) {
    cross_check(collector, input);
    summary.check();
    return format == ReportFormat::Table ? render_table(summary) : render_summary_document(summary, header);
}

std::string render_journal(const std::vector<exchange::LedgerEntry>& journal,
                           const std::vector<exchange::LedgerAccount>& accounts) {
    std::map<AccountId, std::string> names;
    for (const auto& a : accounts) {
        names[a.id] = a.name;
    }
    auto name = [&](AccountId id) {
        const auto it = names.find(id);
        return it == names.end() ? std::to_string(id.value) : it->second;
    };
    std::ostringstream out;
    out << "index,time,from,to,amount,reason,sla_id\n";
    for (const auto& e : journal) {
        out << e.index << ',' << e.time << ',' << name(e.from) << ',' << name(e.to) << ',' << e.amount.micros() << ','
            << exchange::to_string(e.reason) << ',' << (e.sla ? e.sla->value : -1) << '\n';
    }
    return out.str();
}

} // namespace mocsim::metrics
