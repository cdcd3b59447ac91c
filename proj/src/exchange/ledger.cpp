#include <mocsim/exchange/ledger.hpp>

#include <mocsim/core/error.hpp>

#include <array>

namespace mocsim::exchange {

namespace {

constexpr std::array<std::string_view, 4> kReasonNames{"funding", "payment", "penalty", "fee"};

} // namespace

std::string_view to_string(TransferReason r) noexcept { return kReasonNames.at(static_cast<std::size_t>(r)); }

std::optional<TransferReason> transfer_reason_from_string(std::string_view s) noexcept {
    for (std::size_t i = 0; i < kReasonNames.size(); ++i) {
        if (kReasonNames[i] == s) {
            return static_cast<TransferReason>(i);
        }
    }
    return std::nullopt;
}

Ledger::Ledger() { accounts_.push_back({kExternal, "external", Money{0}}); }

AccountId Ledger::open_account(std::string name) {
    const AccountId id{static_cast<std::int64_t>(accounts_.size())};
    accounts_.push_back({id, std::move(name), Money{0}});
    return id;
}

LedgerAccount& Ledger::account_mut(AccountId id) {
    if (!id.valid() || static_cast<std::size_t>(id.value) >= accounts_.size()) {
        throw UnknownAccount("account " + std::to_string(id.value));
    }
    return accounts_[static_cast<std::size_t>(id.value)];
}

const LedgerAccount& Ledger::account(AccountId id) const { return const_cast<Ledger*>(this)->account_mut(id); }

Money Ledger::balance(AccountId id) const { return account(id).balance; }

const LedgerEntry& Ledger::transfer(AccountId from, AccountId to, Money amount, TransferReason reason, SimTime at,
                                    std::optional<SlaId> sla) {
    if (amount <= Money{0}) {
        throw InvalidAmount("transfer amount must be > 0, got " + std::to_string(amount.micros()));
    }
    auto& src = account_mut(from);
    auto& dst = account_mut(to);
    if (from == to) {
        throw InvalidAmount("transfer from account " + std::to_string(from.value) + " to itself");
    }
    if (from != kExternal && src.balance < amount) {
        throw InsufficientFunds("account " + src.name + " holds " + std::to_string(src.balance.micros()) +
                                ", needs " + std::to_string(amount.micros()));
    }
    // Compute both results before writing so an overflow leaves no trace.
    const Money new_src = src.balance - amount;
    const Money new_dst = dst.balance + amount;
    src.balance = new_src;
    dst.balance = new_dst;
    journal_.push_back({journal_.size(), at, from, to, amount, reason, sla});
    return journal_.back();
}

Money Ledger::total() const {
    Money t{0};
    for (const auto& a : accounts_) {
        t += a.balance;
    }
    return t;
}

void Ledger::check_conservation() const {
    const Money t = total();
    if (t != Money{0}) {
        throw InvariantViolation("ledger balances sum to " + std::to_string(t.micros()) + " instead of 0");
    }
}

} // namespace mocsim::exchange
