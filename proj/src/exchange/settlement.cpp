#include <mocsim/exchange/settlement.hpp>

#include <mocsim/core/error.hpp>

#include <limits>
#include <stdexcept>

namespace mocsim::exchange {

Settlement SettlementDesk::settle_sla(const negotiation::Sla& sla, AccountId buyer, AccountId seller,
                                      std::optional<SimTime> actual_completion, SimTime at,
                                      std::optional<Money> charge) {
    if (settled_.contains(sla.id)) {
        throw AlreadySettled("sla " + std::to_string(sla.id.value));
    }
    const Money payment = charge.value_or(sla.price);
    if (payment < Money{0} || payment > sla.price) {
        throw std::invalid_argument("charge must lie in [0, price] for sla " + std::to_string(sla.id.value));
    }
    const SimTime lateness = actual_completion ? *actual_completion - sla.promised_completion
                                               : std::numeric_limits<SimTime>::max();
    const Money penalty = min(sla.penalty.penalty(lateness), payment);

    Settlement s;
    s.sla = sla.id;
    s.payment = payment;
    s.penalty = penalty;
    s.completion = actual_completion;
    if (payment > Money{0}) {
        s.entries.push_back(ledger_.transfer(buyer, seller, payment, TransferReason::Payment, at, sla.id));
    }
    if (penalty > Money{0}) {
        s.entries.push_back(ledger_.transfer(seller, buyer, penalty, TransferReason::Penalty, at, sla.id));
    }
    settled_.insert(sla.id);
    ledger_.check_conservation();
    return s;
}

Money realized_utility_from_journal(const std::vector<LedgerEntry>& journal, AccountId account) {
    Money net{0};
    for (const auto& e : journal) {
        if (e.reason == TransferReason::Funding) {
            continue;
        }
        if (e.to == account) {
            net += e.amount;
        }
        if (e.from == account) {
            net -= e.amount;
        }
    }
    return net;
}

} // namespace mocsim::exchange
