#pragma once

#include <mocsim/core/types.hpp>

#include <map>
#include <optional>
#include <string_view>
#include <vector>

namespace mocsim::exchange {

enum class Side : std::uint8_t { Bid, Ask };

[[nodiscard]] std::string_view to_string(Side s) noexcept;

struct Order {
    OrderId id; ///< assigned on submission
    Side side = Side::Bid;
    ParticipantId participant;
    Money unit_price; ///< per cu-tick
    std::int64_t quantity = 0; ///< cu-ticks, reduced by partial fills
    Interval window;  ///< delivery period
    SimTime expiry = 0;

    friend bool operator==(const Order&, const Order&) = default;
};

struct Match {
    OrderId bid;
    OrderId ask;
    ParticipantId buyer;
    ParticipantId seller;
    std::int64_t quantity = 0;
    Money clearing_price; ///< per cu-tick

    friend bool operator==(const Match&, const Match&) = default;
};

struct MatchResult {
    SimTime round_time = 0;
    Interval delivery;
    std::vector<Match> matches;
    std::vector<OrderId> unmatched; ///< participating orders left with residual quantity
    std::vector<OrderId> expired;   ///< removed before clearing
    std::optional<Money> clearing_price;

    [[nodiscard]] std::int64_t traded() const noexcept;
};

/// Sealed book for a periodic uniform-price call double auction.
class CallAuction {
public:
    /// Throws InvalidOrder: non-positive quantity, negative price, empty window,
    /// window already over, or expiry before `now`.
    OrderId submit(Order order, SimTime now);
    OrderId submit_bid(Order order, SimTime now);
    OrderId submit_ask(Order order, SimTime now);
    bool cancel(OrderId id);

    /// Drops orders with expiry < at, then clears every order whose window
    /// overlaps [at, at + span). Bids are walked by price descending, asks
    /// ascending, ties by order id; units trade while bid >= ask and all trade
    /// at floor((bid_l + ask_l) / 2) of the last traded pair.
    MatchResult clear(SimTime at, SimTime span);

    [[nodiscard]] const std::map<OrderId, Order>& book() const noexcept { return book_; }
    [[nodiscard]] std::optional<Money> last_clearing_price() const noexcept { return last_price_; }

private:
    std::map<OrderId, Order> book_;
    std::int64_t next_id_ = 0;
    std::optional<Money> last_price_;
};

} // namespace mocsim::exchange
