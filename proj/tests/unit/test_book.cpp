#include <doctest.h>

#include <vector>

#include "nmzi/book.hpp"
#include "nmzi/errors.hpp"
#include "nmzi/model.hpp"

using namespace nmzi;

TEST_CASE("initial book: one order per level, unit spread at the centre") {
    OrderBook b(10);
    CHECK(b.best_bid_index() == 4);
    CHECK(b.best_ask_index() == 5);
    CHECK(b.spread() == 1);
    CHECK(b.mid() == 9); // 4.5 ticks
    CHECK(b.count(Side::Buy) == 5);
    CHECK(b.count(Side::Sell) == 5);
    CHECK(b.gap(Side::Buy) == 1);
    CHECK(b.gap(Side::Sell) == 1);
    CHECK_NOTHROW(b.check_invariants());
}

TEST_CASE("grid size must be even and at least 4") {
    CHECK_THROWS_AS(OrderBook(3), InvalidConfiguration);
    CHECK_THROWS_AS(OrderBook(7), InvalidConfiguration);
}

TEST_CASE("market order consumes the best opposite quote") {
    OrderBook b(10);
    const BookDelta d = b.execute_market_order(Side::Buy);
    CHECK(d.kind == DeltaKind::Market);
    CHECK(d.price == 5);
    CHECK(b.best_ask_index() == 6);
    CHECK(b.spread() == 2);
    CHECK(d.mid_change() == 1); // +1 half-tick
    b.execute_market_order(Side::Sell);
    CHECK(b.best_bid_index() == 3);
    CHECK(b.mid() == 9);
    CHECK_NOTHROW(b.check_invariants());
}

TEST_CASE("FIFO priority within a level") {
    OrderBook b(10);
    const OrderId first = b.queue(5).front();
    const OrderId second = b.place_limit_order(Side::Sell, 5).id;
    CHECK(b.depth(5) == 2);
    b.execute_market_order(Side::Buy);
    REQUIRE(b.depth(5) == 1);
    CHECK(b.queue(5).front() == second);
    CHECK(second != first);
}

TEST_CASE("crossing limit orders are rejected") {
    OrderBook b(10);
    CHECK_THROWS_AS(b.place_limit_order(Side::Buy, 5), RejectedOrder);
    CHECK_THROWS_AS(b.place_limit_order(Side::Sell, 4), RejectedOrder);
    CHECK_THROWS_AS(b.place_limit_order(Side::Buy, -1), RejectedOrder);
    CHECK_THROWS_AS(b.place_limit_order(Side::Sell, 10), RejectedOrder);
}

TEST_CASE("limit order inside the spread narrows it") {
    OrderBook b(10);
    b.execute_market_order(Side::Buy);
    b.execute_market_order(Side::Buy); // ask at 7, spread 3
    CHECK(b.spread() == 3);
    const BookDelta d = b.place_limit_order(Side::Sell, 6);
    CHECK(b.best_ask_index() == 6);
    CHECK(d.mid_change() == -1);
}

TEST_CASE("cancellation of the best quote widens the spread by the gap") {
    OrderBook b(10);
    b.cancel_order(b.queue(3).front()); // bid gap becomes 2
    CHECK(b.gap(Side::Buy) == 2);
    const BookDelta d = b.cancel_order(b.queue(4).front());
    CHECK(b.best_bid_index() == 2);
    CHECK(d.mid_change() == -2);
    CHECK_THROWS_AS(b.cancel_order(9999), InternalConsistency);
}

TEST_CASE("market order against an empty side raises") {
    OrderBook b(4);
    b.execute_market_order(Side::Buy);
    b.execute_market_order(Side::Buy);
    CHECK(b.empty(Side::Sell));
    CHECK(b.best_ask_index() == 4); // virtual quote outside the grid
    CHECK_THROWS_AS(b.execute_market_order(Side::Buy), LiquidityExhausted);
}

TEST_CASE("recenter shifts the grid and drops orders pushed off it") {
    OrderBook b(10);
    for (int i = 0; i < 3; ++i) b.execute_market_order(Side::Buy); // asks 8, 9 left
    const HalfTicks mid = b.mid();
    const BookDelta d = b.recenter();
    CHECK(d.shift == 1); // (4 + 8 - 9) / 2 rounded down
    CHECK(d.dropped == 1);
    CHECK(b.grid_offset() == 1);
    CHECK(b.mid() == mid); // the price does not move
    CHECK(b.truncated() == 1);
    CHECK(b.best_bid() == 4);
    CHECK(b.best_ask() == 8);
    CHECK_NOTHROW(b.check_invariants());
}

TEST_CASE("recenter with an empty side is a no-op") {
    OrderBook b(4);
    b.execute_market_order(Side::Buy);
    b.execute_market_order(Side::Buy);
    CHECK(b.recenter().shift == 0);
}

TEST_CASE("delta log replays to the same final state") {
    const ModelParams p{0.0131, 0.0441, 0.1174, 101, 300};
    Simulation sim(p, NmziParams{1e-2, 1e-3}, 17);
    std::vector<BookDelta> log;
    sim.record_deltas(&log);
    for (int i = 0; i < 30000; ++i) sim.step();
    sim.book().check_invariants();

    OrderBook replay(p.levels);
    for (const auto& d : log) replay.apply(d);
    CHECK(replay.same_state(sim.book()));
    CHECK(replay.mid() == sim.book().mid());
}

TEST_CASE("invariants hold along a long random trajectory") {
    const ModelParams p{0.0131, 0.0441, 0.1174, 101, 300};
    Simulation sim(p, NmziParams{1e-3, 1e-4}, 5);
    for (int block = 0; block < 20; ++block) {
        for (int i = 0; i < 5000; ++i) sim.step();
        REQUIRE_NOTHROW(sim.book().check_invariants());
        CHECK(sim.book().spread() >= 1);
    }
}
