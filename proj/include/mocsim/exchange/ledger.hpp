#pragma once

#include <mocsim/core/types.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mocsim::exchange {

enum class TransferReason : std::uint8_t { Funding, Payment, Penalty, Fee };

[[nodiscard]] std::string_view to_string(TransferReason r) noexcept;
[[nodiscard]] std::optional<TransferReason> transfer_reason_from_string(std::string_view s) noexcept;

struct LedgerEntry {
    std::size_t index = 0;
    SimTime time = 0;
    AccountId from;
    AccountId to;
    Money amount;
    TransferReason reason = TransferReason::Payment;
    std::optional<SlaId> sla;

    friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

struct LedgerAccount {
    AccountId id;
    std::string name;
    Money balance;
};

/// Banking ledger with an append-only journal. Account 0 is the external
/// world and the only account allowed to go negative. Accounts open at zero,
/// so the balance total is zero at every step.
class Ledger {
public:
    Ledger();

    static constexpr AccountId kExternal{0};

    AccountId open_account(std::string name);

    /// Throws InvalidAmount, UnknownAccount, InsufficientFunds. No state changes on error.
    const LedgerEntry& transfer(AccountId from, AccountId to, Money amount, TransferReason reason, SimTime at,
                                std::optional<SlaId> sla = std::nullopt);

    [[nodiscard]] Money balance(AccountId id) const;
    [[nodiscard]] const LedgerAccount& account(AccountId id) const;
    [[nodiscard]] const std::vector<LedgerAccount>& accounts() const noexcept { return accounts_; }
    [[nodiscard]] const std::vector<LedgerEntry>& journal() const noexcept { return journal_; }
    [[nodiscard]] Money total() const;

    /// Throws InvariantViolation unless the balance total is zero.
    void check_conservation() const;

private:
    LedgerAccount& account_mut(AccountId id);

    std::vector<LedgerAccount> accounts_;
    std::vector<LedgerEntry> journal_;
};

} // namespace mocsim::exchange
