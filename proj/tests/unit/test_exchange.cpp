#include <doctest.h>

#include <mocsim/core/error.hpp>
#include <mocsim/exchange/agents.hpp>
#include <mocsim/exchange/auction.hpp>
#include <mocsim/exchange/directory.hpp>
#include <mocsim/exchange/ledger.hpp>
#include <mocsim/exchange/reservation.hpp>
#include <mocsim/exchange/settlement.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <random>

using namespace mocsim;
using namespace mocsim::exchange;

namespace {

std::int64_t rand_in(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

DirectoryListing provider_listing(std::int64_t id, std::int32_t rel, std::int64_t hint = 100, SimTime until = 50) {
    DirectoryListing l;
    l.participant = ParticipantId{id};
    l.role = ParticipantRole::Provider;
    l.capacity = 8;
    l.reliability_class = rel;
    l.price_hint = Money{hint};
    l.window = {0, 100};
    l.valid_until = until;
    return l;
}

Order order(std::int64_t participant, std::int64_t price, std::int64_t qty, Interval window = {0, 100},
            SimTime expiry = 100) {
    Order o;
    o.participant = ParticipantId{participant};
    o.unit_price = Money{price};
    o.quantity = qty;
    o.window = window;
    o.expiry = expiry;
    return o;
}

// Largest unit volume that can trade at one common price p, i.e. with every
// traded bid >= p >= every traded ask, by trying every candidate price.
std::int64_t brute_max_trade(const std::vector<std::int64_t>& bid_units, const std::vector<std::int64_t>& ask_units) {
    std::int64_t best = 0;
    for (std::int64_t p = 0; p <= 20; ++p) {
        const auto buyers = std::count_if(bid_units.begin(), bid_units.end(), [p](auto b) { return b >= p; });
        const auto sellers = std::count_if(ask_units.begin(), ask_units.end(), [p](auto a) { return a <= p; });
        best = std::max<std::int64_t>(best, std::min(buyers, sellers));
    }
    return best;
}

negotiation::Sla sla(std::int64_t id, std::int64_t price, std::int64_t rate, SimTime promised) {
    negotiation::Sla s;
    s.id = SlaId{id};
    s.buyer = ParticipantId{1};
    s.seller = ParticipantId{2};
    s.price = Money{price};
    s.promised_completion = promised;
    s.penalty = {Money{rate}, Money{price}};
    return s;
}

} // namespace

TEST_CASE("directory queries") {
    Directory dir;
    dir.register_listing(provider_listing(3, 1), 0);
    auto all = dir.query({.at = 0, .role = ParticipantRole::Provider});
    REQUIRE(all.size() == 1);
    CHECK(all[0].participant == ParticipantId{3});
    CHECK(dir.query({.at = 51}).empty());
    CHECK(dir.query({.at = 0, .role = ParticipantRole::Broker}).empty());

    dir.register_listing(provider_listing(1, 2), 0);
    dir.register_listing(provider_listing(2, 3), 0);
    auto graded = dir.query({.at = 0, .min_reliability = 2});
    REQUIRE(graded.size() == 2);
    CHECK(graded[0].reliability_class == 2);
    CHECK(graded[1].reliability_class == 3);
    CHECK(graded[0].participant < graded[1].participant);

    CHECK(dir.query({.at = 0, .max_price_hint = Money{99}}).empty());
    CHECK(dir.query({.at = 0, .window = Interval{100, 200}}).empty());

    // Re-registering replaces the earlier listing.
    dir.register_listing(provider_listing(3, 1, 50), 0);
    CHECK(dir.size() == 3);
    CHECK(dir.query({.at = 0, .max_price_hint = Money{60}}).size() == 1);
    dir.withdraw(ParticipantId{3}, ParticipantRole::Provider);
    CHECK(dir.size() == 2);

    auto bad = provider_listing(4, 1);
    bad.capacity = -1;
    CHECK_THROWS_AS(dir.register_listing(bad, 0), InvalidListing);
    CHECK_THROWS_AS(dir.register_listing(provider_listing(4, 1, 1, 5), 6), InvalidListing);
}

TEST_CASE("order submission") {
    CallAuction a;
    auto id = a.submit_bid(order(1, 10, 3), 0);
    CHECK(a.book().contains(id));
    CHECK(a.book().at(id).side == Side::Bid);
    CHECK_THROWS_AS(a.submit_bid(order(1, 10, 0), 0), InvalidOrder);
    CHECK_THROWS_AS(a.submit_ask(order(1, -1, 1), 0), InvalidOrder);
    CHECK_THROWS_AS(a.submit_ask(order(1, 5, 1, {0, 100}, 4), 5), InvalidOrder);
    CHECK_THROWS_AS(a.submit_ask(order(1, 5, 1, {0, 5}, 50), 5), InvalidOrder);
    CHECK(a.cancel(id));
    CHECK_FALSE(a.cancel(id));
}

TEST_CASE("clearing the textbook book") {
    CallAuction a;
    std::vector<OrderId> bids;
    std::vector<OrderId> asks;
    for (auto p : {10, 8, 6}) {
        bids.push_back(a.submit_bid(order(1, p, 1), 0));
    }
    for (auto p : {5, 7, 9}) {
        asks.push_back(a.submit_ask(order(2, p, 1), 0));
    }
    auto r = a.clear(0, 10);
    REQUIRE(r.matches.size() == 2);
    CHECK(r.matches[0].bid == bids[0]);
    CHECK(r.matches[0].ask == asks[0]);
    CHECK(r.matches[1].bid == bids[1]);
    CHECK(r.matches[1].ask == asks[1]);
    CHECK(r.traded() == 2);
    CHECK(r.clearing_price == Money{7});
    CHECK(brute_max_trade({10, 8, 6}, {5, 7, 9}) == 2);
    CHECK(*r.clearing_price >= Money{7});
    CHECK(*r.clearing_price <= Money{8});
    CHECK(r.unmatched == std::vector<OrderId>{bids[2], asks[2]});
}

TEST_CASE("no crossing and empty books") {
    CallAuction a;
    CHECK(a.clear(0, 10).matches.empty());
    a.submit_bid(order(1, 5, 1), 0);
    a.submit_ask(order(2, 9, 1), 0);
    auto r = a.clear(0, 10);
    CHECK(r.matches.empty());
    CHECK_FALSE(r.clearing_price.has_value());
    CHECK(a.book().size() == 2);
}

TEST_CASE("partial fills rest and expired orders are dropped") {
    CallAuction a;
    auto bid = a.submit_bid(order(1, 10, 5), 0);
    a.submit_ask(order(2, 4, 2), 0);
    auto r = a.clear(0, 10);
    CHECK(r.traded() == 2);
    CHECK(a.book().at(bid).quantity == 3);
    auto late = a.submit_ask(order(3, 4, 1, {0, 100}, 12), 0);
    a.submit_ask(order(4, 4, 1, {0, 100}, 30), 0);
    r = a.clear(20, 10);
    CHECK(r.expired == std::vector<OrderId>{late});
    CHECK(r.traded() == 1);
    CHECK(a.book().at(bid).quantity == 2);
}

TEST_CASE("auction validity and maximal trade against brute force") {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 400; ++trial) {
        CallAuction a;
        const SimTime at = 10;
        const SimTime span = 10;
        std::map<OrderId, Order> submitted;
        std::vector<std::int64_t> bid_units;
        std::vector<std::int64_t> ask_units;
        const auto nb = rand_in(rng, 0, 5);
        const auto na = rand_in(rng, 0, 5);
        for (std::int64_t i = 0; i < nb + na; ++i) {
            const bool is_bid = i < nb;
            const auto begin = rand_in(rng, 5, 30);
            auto o = order(i, rand_in(rng, 1, 12), rand_in(rng, 1, 2), {begin, begin + rand_in(rng, 1, 10)});
            const auto id = is_bid ? a.submit_bid(o, 0) : a.submit_ask(o, 0);
            o.id = id;
            o.side = is_bid ? Side::Bid : Side::Ask;
            submitted[id] = o;
            if (o.window.overlaps({at, at + span})) {
                for (std::int64_t u = 0; u < o.quantity; ++u) {
                    (is_bid ? bid_units : ask_units).push_back(o.unit_price.micros());
                }
            }
        }
        auto r = a.clear(at, span);
        CHECK(r.traded() == brute_max_trade(bid_units, ask_units));
        std::map<OrderId, std::int64_t> filled;
        for (const auto& m : r.matches) {
            const auto& b = submitted.at(m.bid);
            const auto& s = submitted.at(m.ask);
            CHECK(s.unit_price <= m.clearing_price);
            CHECK(m.clearing_price <= b.unit_price);
            CHECK(b.window.overlaps({at, at + span}));
            CHECK(s.window.overlaps({at, at + span}));
            filled[m.bid] += m.quantity;
            filled[m.ask] += m.quantity;
        }
        for (const auto& [id, q] : filled) {
            CHECK(q <= submitted.at(id).quantity);
        }
    }
}

TEST_CASE("ledger transfers") {
    Ledger l;
    auto a = l.open_account("A");
    auto b = l.open_account("B");
    l.transfer(Ledger::kExternal, a, Money{500}, TransferReason::Funding, 0);
    const auto before = l.total();
    l.transfer(a, b, Money{100}, TransferReason::Payment, 1);
    CHECK(l.balance(a) == Money{400});
    CHECK(l.balance(b) == Money{100});
    CHECK(l.total() == before);
    CHECK(l.balance(Ledger::kExternal) == Money{-500});
    CHECK_THROWS_AS(l.transfer(a, b, Money{600}, TransferReason::Payment, 2), InsufficientFunds);
    CHECK_THROWS_AS(l.transfer(a, AccountId{9}, Money{1}, TransferReason::Payment, 2), UnknownAccount);
    CHECK_THROWS_AS(l.transfer(a, b, Money{0}, TransferReason::Payment, 2), InvalidAmount);
    CHECK_THROWS_AS(l.transfer(a, b, Money{-5}, TransferReason::Payment, 2), InvalidAmount);
    CHECK(l.journal().size() == 2);
    CHECK(l.balance(a) == Money{400});
    CHECK_NOTHROW(l.check_conservation());
}

TEST_CASE("journal replay reproduces balances") {
    std::mt19937_64 rng(55);
    Ledger l;
    std::vector<AccountId> ids{Ledger::kExternal};
    for (int i = 0; i < 6; ++i) {
        ids.push_back(l.open_account("acct" + std::to_string(i)));
    }
    for (int step = 0; step < 2000; ++step) {
        const auto from = ids[rng() % ids.size()];
        const auto to = ids[rng() % ids.size()];
        const Money amt{rand_in(rng, -5, 300)};
        try {
            l.transfer(from, to, amt, step % 3 == 0 ? TransferReason::Funding : TransferReason::Payment, step);
        } catch (const Error&) {
        }
        CHECK(l.total() == Money{0});
    }
    std::map<std::int64_t, std::int64_t> replay;
    for (const auto& e : l.journal()) {
        replay[e.from.value] -= e.amount.micros();
        replay[e.to.value] += e.amount.micros();
    }
    for (const auto& acc : l.accounts()) {
        CHECK(acc.balance.micros() == replay[acc.id.value]);
        if (acc.id != Ledger::kExternal) {
            CHECK(acc.balance >= Money{0});
        }
    }
}

TEST_CASE("reservation examples") {
    ReservationBook book;
    book.add_provider(ParticipantId{1}, 4);
    auto r = book.reserve(ParticipantId{1}, ParticipantId{7}, {10, 20}, 4, SlaId{0});
    CHECK(r.capacity == 4);
    CHECK_THROWS_AS(book.reserve(ParticipantId{1}, ParticipantId{7}, {15, 25}, 1, SlaId{1}), ReservationConflict);
    CHECK_NOTHROW(book.reserve(ParticipantId{1}, ParticipantId{7}, {20, 25}, 4, SlaId{1}));
    CHECK_THROWS_AS(book.reserve(ParticipantId{1}, ParticipantId{7}, {0, 5}, 1, SlaId{}), std::invalid_argument);
}

TEST_CASE("granted reservations stay within capacity per tick") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        ReservationBook book;
        const std::int64_t cap = rand_in(rng, 1, 10);
        book.add_provider(ParticipantId{0}, cap);
        std::vector<std::int64_t> ticks(80, 0);
        for (int i = 0; i < 40; ++i) {
            const auto begin = rand_in(rng, 0, 60);
            const Interval w{begin, begin + rand_in(rng, 1, 19)};
            const auto need = rand_in(rng, 1, cap);
            bool fits = true;
            for (auto t = w.begin; t < w.end; ++t) {
                fits = fits && ticks[static_cast<std::size_t>(t)] + need <= cap;
            }
            bool granted = true;
            try {
                book.reserve(ParticipantId{0}, ParticipantId{1}, w, need, SlaId{i});
            } catch (const ReservationConflict&) {
                granted = false;
            }
            CHECK(granted == fits);
            if (granted) {
                for (auto t = w.begin; t < w.end; ++t) {
                    ticks[static_cast<std::size_t>(t)] += need;
                }
            }
        }
        for (std::size_t t = 0; t < ticks.size(); ++t) {
            CHECK(ticks[t] <= cap);
            CHECK(book.reserved_at(ParticipantId{0}, static_cast<SimTime>(t)) == ticks[t]);
        }
    }
}

TEST_CASE("provider price setting") {
    const market_price::Variable v{Money{100}, Rational{1, 2}, Rational{1}};
    CHECK(provider_set_price(v, 0, 1, Money{0}) == Money{100});
    CHECK(provider_set_price(v, 1, 1, Money{0}) == Money{150});
    CHECK(provider_set_price(v, 0, 3, Money{0}) == Money{300});
    CHECK(provider_set_price(v, 0, Rational{1, 2}, Money{0}) == Money{100});
    CHECK(provider_set_price(market_price::Fixed{Money{70}}, 1, 5, Money{0}) == Money{70});
    CHECK(provider_set_price(market_price::Fixed{Money{70}}, 1, 5, Money{90}) == Money{90});
    CHECK_THROWS_AS((void)provider_set_price(v, Rational{2}, 1, Money{0}), InvalidPolicy);
    CHECK_THROWS_AS((void)provider_set_price(v, 0, Rational{-1}, Money{0}), InvalidPolicy);
    CHECK_THROWS_AS((void)provider_set_price(market_price::Variable{Money{1}, Rational{-1}, Rational{0}}, 0, 1,
                                             Money{0}),
                    InvalidPolicy);
}

TEST_CASE("posted price never falls below the cost floor") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 2000; ++trial) {
        const market_price::Variable v{Money{rand_in(rng, 0, 1000)}, Rational{rand_in(rng, 0, 5), rand_in(rng, 1, 4)},
                                       Rational{rand_in(rng, 0, 5), rand_in(rng, 1, 4)}};
        const Rational u{rand_in(rng, 0, 10), 10};
        const Rational d{rand_in(rng, 0, 30), 10};
        const Money floor{rand_in(rng, 0, 2000)};
        const Money p = provider_set_price(v, u, d, floor);
        CHECK(p >= floor);
        CHECK(p >= provider_set_price(v, u, d, Money{0}));
    }
}

TEST_CASE("venue selection examples") {
    CHECK(provider_select_venues({{1, Money{5}}, {2, Money{-3}}}, 5) == std::vector<std::int64_t>{1});
    CHECK(provider_select_venues({{1, Money{-5}}, {2, Money{-3}}}, 5).empty());
    CHECK(provider_select_venues({{1, Money{5}}, {2, Money{9}}}, 1) == std::vector<std::int64_t>{2});
}

TEST_CASE("venue selection maximizes summed utility under the cap") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = rand_in(rng, 0, 7);
        std::vector<VenueEstimate> est;
        for (std::int64_t i = 0; i < n; ++i) {
            est.push_back({i, Money{rand_in(rng, -20, 20)}});
        }
        const auto cap = rand_in(rng, 0, 4);
        auto chosen = provider_select_venues(est, cap);
        std::int64_t got = 0;
        for (auto v : chosen) {
            got += est[static_cast<std::size_t>(v)].estimated_utility.micros();
        }
        std::int64_t best = 0;
        for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
            if (std::popcount(mask) > cap) {
                continue;
            }
            std::int64_t sum = 0;
            for (std::int64_t i = 0; i < n; ++i) {
                if ((mask >> i) & 1U) {
                    sum += est[static_cast<std::size_t>(i)].estimated_utility.micros();
                }
            }
            best = std::max(best, sum);
        }
        CHECK(got == best);
        CHECK(static_cast<std::int64_t>(chosen.size()) <= cap);
    }
}

TEST_CASE("broker decision examples") {
    MarketView view;
    view.last_clearing_price = Money{70};
    view.procurable_capacity = 100;
    RiskModel zero;
    auto d = broker_decide({{RequestId{1}, Money{10'000}, 100, 0}}, view, zero);
    REQUIRE(d.engaged.size() == 1);
    CHECK(d.engaged[0].estimated_utility == Money{3'000});
    CHECK(d.estimated_utility == Money{3'000});

    // Capacity for one: utilities 3000 and 5000.
    auto two = broker_decide({{RequestId{1}, Money{10'000}, 100, 0}, {RequestId{2}, Money{12'000}, 100, 0}}, view, zero);
    REQUIRE(two.engaged.size() == 1);
    CHECK(two.engaged[0].request == RequestId{2});
    CHECK(two.estimated_utility == Money{5'000});

    auto none = broker_decide({{RequestId{1}, Money{5'000}, 100, 0}}, view, zero);
    CHECK(none.engaged.empty());

    MarketView blind;
    blind.procurable_capacity = 100;
    CHECK(broker_decide({{RequestId{1}, Money{10'000}, 100, 0}}, blind, zero).engaged.empty());
    blind.providers.push_back(provider_listing(4, 0, 60));
    blind.providers.push_back(provider_listing(5, 0, 80));
    CHECK(broker_decide({{RequestId{1}, Money{10'000}, 100, 0}}, blind, zero).estimated_utility == Money{4'000});
}

TEST_CASE("expected penalty enters broker utility") {
    MarketView view;
    view.last_clearing_price = Money{70};
    view.procurable_capacity = 100;
    RiskModel risk;
    risk.lateness_probability[1] = Rational{1, 4};
    risk.expected_lateness = 10;
    risk.penalty_rate = Money{40};
    auto d = broker_decide({{RequestId{1}, Money{10'000}, 100, 1}}, view, risk);
    REQUIRE(d.engaged.size() == 1);
    CHECK(d.engaged[0].expected_penalty == Money{100});
    CHECK(d.engaged[0].estimated_utility == Money{2'900});
    auto safe = broker_decide({{RequestId{1}, Money{10'000}, 100, 0}}, view, risk);
    CHECK(safe.engaged[0].expected_penalty == Money{0});
}

TEST_CASE("broker subset choice equals exhaustive search") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 300; ++trial) {
        MarketView view;
        view.last_clearing_price = Money{rand_in(rng, 1, 10)};
        view.procurable_capacity = rand_in(rng, 0, 200);
        RiskModel risk;
        std::vector<BrokerCandidate> cands;
        const auto n = rand_in(rng, 0, 9);
        for (std::int64_t i = 0; i < n; ++i) {
            cands.push_back({RequestId{i}, Money{rand_in(rng, 0, 1500)}, rand_in(rng, 1, 100), 0});
        }
        auto d = broker_decide(cands, view, risk);
        CHECK(d.exact);
        std::int64_t used = 0;
        for (const auto& a : d.engaged) {
            used += a.volume;
            CHECK(a.estimated_utility > Money{0});
        }
        CHECK(used <= view.procurable_capacity);

        // Include/exclude recursion over raw candidates.
        std::function<std::int64_t(std::size_t, std::int64_t)> best = [&](std::size_t i, std::int64_t left) {
            if (i == cands.size()) {
                return std::int64_t{0};
            }
            std::int64_t skip = best(i + 1, left);
            const auto& c = cands[i];
            const auto u = c.willingness.micros() - view.last_clearing_price->micros() * c.volume;
            if (c.volume <= left) {
                skip = std::max(skip, u + best(i + 1, left - c.volume));
            }
            return skip;
        };
        CHECK(d.estimated_utility.micros() == best(0, view.procurable_capacity));
    }
}

TEST_CASE("greedy fallback beyond the exact limit respects capacity") {
    MarketView view;
    view.last_clearing_price = Money{1};
    view.procurable_capacity = 50;
    std::vector<BrokerCandidate> cands;
    for (std::int64_t i = 0; i < 20; ++i) {
        cands.push_back({RequestId{i}, Money{100 + i}, 10, 0});
    }
    auto d = broker_decide(cands, view, {});
    CHECK_FALSE(d.exact);
    REQUIRE(d.engaged.size() == 5);
    CHECK(d.engaged.front().request == RequestId{15});
}

TEST_CASE("settlement examples") {
    Ledger l;
    auto buyer = l.open_account("buyer");
    auto seller = l.open_account("seller");
    l.transfer(Ledger::kExternal, buyer, Money{10'000}, TransferReason::Funding, 0);
    SettlementDesk desk(l);

    auto on_time = desk.settle_sla(sla(1, 1'000, 20, 50), buyer, seller, 50, 50);
    CHECK(on_time.payment == Money{1'000});
    CHECK(on_time.penalty == Money{0});
    CHECK(on_time.entries.size() == 1);

    auto late = desk.settle_sla(sla(2, 1'000, 20, 50), buyer, seller, 60, 60);
    CHECK(late.penalty == Money{200});
    CHECK(late.seller_net() == Money{800});
    REQUIRE(late.entries.size() == 2);
    CHECK(late.entries[1].reason == TransferReason::Penalty);
    CHECK(late.entries[1].sla == SlaId{2});

    auto capped = desk.settle_sla(sla(3, 1'000, 20, 50), buyer, seller, 550, 550);
    CHECK(capped.penalty == Money{1'000});
    CHECK(capped.seller_net() == Money{0});

    auto never = desk.settle_sla(sla(4, 1'000, 20, 50), buyer, seller, std::nullopt, 90);
    CHECK(never.penalty == Money{1'000});

    auto partial = desk.settle_sla(sla(5, 1'000, 20, 50), buyer, seller, 60, 60, Money{400});
    CHECK(partial.payment == Money{400});
    CHECK(partial.penalty == Money{200});

    CHECK_THROWS_AS(desk.settle_sla(sla(2, 1'000, 20, 50), buyer, seller, 50, 70), AlreadySettled);
    CHECK(l.total() == Money{0});
}

TEST_CASE("settlement bounds on random outcomes") {
    std::mt19937_64 rng(5);
    Ledger l;
    auto buyer = l.open_account("buyer");
    auto seller = l.open_account("seller");
    l.transfer(Ledger::kExternal, buyer, Money{1'000'000'000}, TransferReason::Funding, 0);
    SettlementDesk desk(l);
    for (int i = 0; i < 1000; ++i) {
        const auto price = rand_in(rng, 0, 5'000);
        const auto rate = rand_in(rng, 1, 100);
        const SimTime promised = rand_in(rng, 0, 100);
        const SimTime done = rand_in(rng, 0, 200);
        auto s = desk.settle_sla(sla(i, price, rate, promised), buyer, seller, done, done);
        CHECK(s.seller_net() >= Money{0});
        CHECK(s.seller_net() <= Money{price});
        if (price > 0) {
            CHECK((s.penalty == Money{0}) == (done <= promised));
        }
    }
}

TEST_CASE("broker accounting identity from the ledger and from its own book") {
    std::mt19937_64 rng(44);
    Ledger l;
    auto consumer = l.open_account("consumer");
    auto broker = l.open_account("broker");
    auto provider = l.open_account("provider");
    l.transfer(Ledger::kExternal, consumer, Money{100'000'000}, TransferReason::Funding, 0);
    l.transfer(Ledger::kExternal, broker, Money{100'000'000}, TransferReason::Funding, 0);
    SettlementDesk desk(l);
    BrokerBook book;
    for (int i = 0; i < 200; ++i) {
        const bool selling = rng() % 2 == 0;
        const auto price = rand_in(rng, 1, 10'000);
        const SimTime promised = 100;
        const SimTime done = rand_in(rng, 80, 200);
        auto s = desk.settle_sla(sla(i, price, rand_in(rng, 1, 200), promised), selling ? consumer : broker,
                                 selling ? broker : provider, done, done);
        if (selling) {
            book.receipts += s.payment;
            book.penalties_paid += s.penalty;
        } else {
            book.payments += s.payment;
            book.penalties_received += s.penalty;
        }
    }
    CHECK(realized_utility_from_journal(l.journal(), broker) == book.realized_utility());
    CHECK(l.balance(broker) - Money{100'000'000} == book.realized_utility());
}
