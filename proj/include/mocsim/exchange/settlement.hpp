#pragma once

#include <mocsim/exchange/ledger.hpp>
#include <mocsim/negotiation/negotiation.hpp>

#include <optional>
#include <set>
#include <vector>

namespace mocsim::exchange {

struct Settlement {
    SlaId sla;
    Money payment;
    Money penalty;
    std::optional<SimTime> completion; ///< empty when the service never completed
    std::vector<LedgerEntry> entries;

    [[nodiscard]] Money seller_net() const { return payment - penalty; }
};

/// Settles each SLA once: buyer pays the seller, seller refunds the penalty.
class SettlementDesk {
public:
    explicit SettlementDesk(Ledger& ledger) : ledger_(ledger) {}

    /// `charge` replaces the SLA price as the payment (usage-based invoices);
    /// it may not exceed the price. Penalty = min(rate * lateness, cap, payment);
    /// a missing completion counts as infinitely late.
    /// Throws AlreadySettled; ledger errors propagate.
    Settlement settle_sla(const negotiation::Sla& sla, AccountId buyer, AccountId seller,
                          std::optional<SimTime> actual_completion, SimTime at,
                          std::optional<Money> charge = std::nullopt);

    [[nodiscard]] bool settled(SlaId id) const noexcept { return settled_.contains(id); }

private:
    Ledger& ledger_;
    std::set<SlaId> settled_;
};

/// Broker's own record of money moved on its behalf.
struct BrokerBook {
    Money receipts;           ///< consumer payments received
    Money payments;           ///< provider payments made
    Money penalties_paid;     ///< refunds to consumers
    Money penalties_received; ///< refunds from providers

    [[nodiscard]] Money realized_utility() const {
        return receipts - payments - (penalties_paid - penalties_received);
    }
};

/// Net non-funding inflow of `account` over the journal.
[[nodiscard]] Money realized_utility_from_journal(const std::vector<LedgerEntry>& journal, AccountId account);

} // namespace mocsim::exchange
