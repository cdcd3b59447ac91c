#include <mocsim/exchange/auction.hpp>

#include <mocsim/core/error.hpp>

#include <algorithm>
#include <string>

namespace mocsim::exchange {

std::string_view to_string(Side s) noexcept { return s == Side::Bid ? "bid" : "ask"; }

std::int64_t MatchResult::traded() const noexcept {
    std::int64_t q = 0;
    for (const auto& m : matches) {
        q += m.quantity;
    }
    return q;
}

OrderId CallAuction::submit(Order order, SimTime now) {
    const std::string who = std::string{to_string(order.side)} + " of participant " +
                            std::to_string(order.participant.value);
    if (order.quantity <= 0) {
        throw InvalidOrder(who + ": quantity must be > 0");
    }
    if (order.unit_price < Money{0}) {
        throw InvalidOrder(who + ": unit price must be >= 0");
    }
    if (order.window.empty() || order.window.end <= now) {
        throw InvalidOrder(who + ": delivery window must be non-empty and in the future");
    }
    if (order.expiry < now) {
        throw InvalidOrder(who + ": expired on arrival");
    }
    order.id = OrderId{next_id_++};
    book_.emplace(order.id, order);
    return order.id;
}

OrderId CallAuction::submit_bid(Order order, SimTime now) {
    order.side = Side::Bid;
    return submit(order, now);
}

OrderId CallAuction::submit_ask(Order order, SimTime now) {
    order.side = Side::Ask;
    return submit(order, now);
}

bool CallAuction::cancel(OrderId id) { return book_.erase(id) > 0; }

MatchResult CallAuction::clear(SimTime at, SimTime span) {
    MatchResult r;
    r.round_time = at;
    r.delivery = {at, at + span};

    for (auto it = book_.begin(); it != book_.end();) {
        if (it->second.expiry < at) {
            r.expired.push_back(it->first);
            it = book_.erase(it);
        } else {
            ++it;
        }
    }

    std::vector<Order*> bids;
    std::vector<Order*> asks;
    for (auto& [id, o] : book_) {
        if (!o.window.overlaps(r.delivery)) {
            continue;
        }
        (o.side == Side::Bid ? bids : asks).push_back(&o);
    }
    std::stable_sort(bids.begin(), bids.end(),
                     [](const Order* a, const Order* b) { return a->unit_price > b->unit_price; });
    std::stable_sort(asks.begin(), asks.end(),
                     [](const Order* a, const Order* b) { return a->unit_price < b->unit_price; });

    struct Fill {
        Order* bid;
        Order* ask;
        std::int64_t quantity;
    };
    std::vector<Fill> fills;
    std::size_t i = 0;
    std::size_t j = 0;
    std::int64_t bid_left = bids.empty() ? 0 : bids[0]->quantity;
    std::int64_t ask_left = asks.empty() ? 0 : asks[0]->quantity;
    while (i < bids.size() && j < asks.size() && bids[i]->unit_price >= asks[j]->unit_price) {
        const std::int64_t q = std::min(bid_left, ask_left);
        fills.push_back({bids[i], asks[j], q});
        bid_left -= q;
        ask_left -= q;
        if (bid_left == 0 && ++i < bids.size()) {
            bid_left = bids[i]->quantity;
        }
        if (ask_left == 0 && ++j < asks.size()) {
            ask_left = asks[j]->quantity;
        }
    }

    if (!fills.empty()) {
        const auto& last = fills.back();
        const Money price{narrow(floor_div(Wide{last.bid->unit_price.micros()} + last.ask->unit_price.micros(), 2))};
        r.clearing_price = price;
        last_price_ = price;
        for (const auto& f : fills) {
            r.matches.push_back({f.bid->id, f.ask->id, f.bid->participant, f.ask->participant, f.quantity, price});
            f.bid->quantity -= f.quantity;
            f.ask->quantity -= f.quantity;
        }
    }

    for (auto* group : {&bids, &asks}) {
        for (const Order* o : *group) {
            if (o->quantity > 0) {
                r.unmatched.push_back(o->id);
            }
        }
    }
    std::sort(r.unmatched.begin(), r.unmatched.end());
    for (auto it = book_.begin(); it != book_.end();) {
        it = it->second.quantity == 0 ? book_.erase(it) : std::next(it);
    }
    return r;
}

} // namespace mocsim::exchange
