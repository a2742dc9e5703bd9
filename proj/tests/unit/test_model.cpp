#include <doctest.h>

#include <cmath>
#include <vector>

#include "nmzi/errors.hpp"
#include "nmzi/model.hpp"

using namespace nmzi;

TEST_CASE("sell probability is a logistic in alpha * rbar") {
    CHECK(sell_lo_probability(0.0, 1e6) == 0.5);
    CHECK(sell_lo_probability(1e-3, 0.0) == 0.5);
    CHECK(sell_lo_probability(1.0, 2.0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
    CHECK(sell_lo_probability(1.0, 2.0) + sell_lo_probability(1.0, -2.0) == doctest::Approx(1.0));
    CHECK(sell_lo_probability(1.0, -1e4) >= 0.0);
    CHECK(sell_lo_probability(1.0, 1e4) == 1.0);
}

TEST_CASE("event rates") {
    const ModelParams p{0.01, 0.05, 0.1, 100, 200};
    const RateTriple r = event_rates(40, p);
    CHECK(r.limit == doctest::Approx(2.0));
    CHECK(r.market == doctest::Approx(0.1));
    CHECK(r.cancel == doctest::Approx(4.0));
    CHECK(r.total == doctest::Approx(6.1));
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS((ModelParams{0.0, 0.1, 0.1, 1, 10}.validate()), InvalidConfiguration);
    CHECK_THROWS_AS((ModelParams{0.1, 0.1, 0.1, 1, 11}.validate()), InvalidConfiguration);
    CHECK_THROWS_AS((NmziParams{-1.0, 1e-3}.validate()), InvalidConfiguration);
    CHECK_THROWS_AS((NmziParams{0.0, 0.0}.validate()), InvalidConfiguration);
    const NmziParams n = NmziParams::from_beta2(1e-3, 1e-3, 20);
    CHECK(n.beta1 == doctest::Approx(1e-3 / 21));
    CHECK(n.beta2(20) == doctest::Approx(1e-3));
}

TEST_CASE("EWMA recursion equals the explicit weighted sum") {
    const double beta = 0.05;
    std::vector<HalfTicks> mids{10, 11, 11, 14, 9, 9, 12, 20, 18, 18, 17};
    EwmaState s(beta, mids[0]);
    for (std::size_t t = 1; t < mids.size(); ++t) {
        s = update_ewma(s, mids[t]);
        double direct = 0;
        for (std::size_t u = 1; u <= t; ++u) {
            direct += std::exp(-beta * static_cast<double>(t - u)) * 0.5 * static_cast<double>(mids[u] - mids[u - 1]);
        }
        CHECK(s.rbar() == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("EWMA jump and rebase") {
    EwmaState s(0.1, 0);
    s.jump(0.5, 3.0);
    CHECK(s.rbar() == 3.0);
    s.jump(0.5, 1.0);
    CHECK(s.rbar() == 2.5);
    s.rebase(40);
    CHECK(s.last_mid() == 40);
    CHECK(s.rbar() == 2.5);
}

TEST_CASE("same seed, same trajectory; different seeds differ") {
    const ModelParams p;
    const NmziParams n{1e-3, 1e-4};
    const auto a = run(p, n, 1000, 20000, 42);
    const auto b = run(p, n, 1000, 20000, 42);
    const auto c = run(p, n, 1000, 20000, 43);
    CHECK(a.mids == b.mids);
    CHECK(a.mo_times == b.mo_times);
    CHECK(a.mids != c.mids);
}

TEST_CASE("stream rule: simulation i uses seed base + i") {
    CHECK(Rng::for_stream(100, 7).seed() == 107);
    Rng r1(5), r2(5);
    for (int i = 0; i < 100; ++i) CHECK(r1.next() == r2.next());
    Rng u(9);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform();
        CHECK((x >= 0.0 && x < 1.0));
        CHECK(u.below(7) < 7);
    }
}

TEST_CASE("sampled event mix matches the rates on a frozen book") {
    const ModelParams p{0.0131, 0.0441, 0.1174, 101, 300};
    OrderBook book(p.levels);
    const EwmaState ewma(1e-3, book.mid());
    Rng rng(11);
    const int n = 200000;
    int counts[3] = {0, 0, 0};
    int sells = 0;
    for (int i = 0; i < n; ++i) {
        const Event e = sample_event(book, p, NmziParams{}, ewma, rng);
        ++counts[static_cast<int>(e.kind)];
        if (e.kind == EventKind::Limit && e.side == Side::Sell) ++sells;
    }
    const RateTriple r = event_rates(book, p);
    const double probs[3] = {r.limit / r.total, r.market / r.total, r.cancel / r.total};
    for (int k = 0; k < 3; ++k) {
        const double sd = std::sqrt(n * probs[k] * (1 - probs[k]));
        CHECK(std::abs(counts[k] - n * probs[k]) < 5 * sd);
    }
    const double sd = std::sqrt(counts[0] * 0.25);
    CHECK(std::abs(sells - 0.5 * counts[0]) < 5 * sd);
}

TEST_CASE("sampled limit orders never cross the book") {
    const ModelParams p{0.0131, 0.0441, 0.1174, 101, 300};
    Simulation sim(p, NmziParams{0.05, 1e-2}, 3);
    for (int i = 0; i < 50000; ++i) {
        const OrderBook& b = sim.book();
        const Ticks bid = b.best_bid(), ask = b.best_ask();
        const StepOutcome o = sim.step();
        if (o.kind == EventKind::Limit) {
            if (o.side == Side::Buy) CHECK(o.price < ask);
            else CHECK(o.price > bid);
        }
    }
}

TEST_CASE("an injected market order updates the trend like any event") {
    const ModelParams p;
    Simulation sim(p, NmziParams{1e-3, 0.01}, 8);
    for (int i = 0; i < 5000; ++i) sim.step();
    const double before = sim.ewma().rbar();
    const StepOutcome o = sim.inject_market_order(Side::Buy);
    CHECK(o.injected);
    CHECK(o.kind == EventKind::Market);
    const double expected = std::exp(-0.01) * before + 0.5 * static_cast<double>(o.mid_after - o.mid_before);
    CHECK(sim.ewma().rbar() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("frozen trend ignores mid moves until updated explicitly") {
    const ModelParams p;
    Simulation sim(p, NmziParams{1e-3, 0.01}, 8);
    sim.freeze_trend(true);
    for (int i = 0; i < 5000; ++i) sim.step();
    CHECK(sim.ewma().rbar() == 0.0);
    CHECK(sim.ewma().last_mid() == sim.book().mid());
    sim.apply_trend_update(0.9, 2.0);
    CHECK(sim.ewma().rbar() == 2.0);
}

TEST_CASE("run summary bookkeeping") {
    const auto t = run(ModelParams{}, NmziParams{}, 2000, 10000, 1);
    const RunSummary& s = t.summary;
    CHECK(s.events == 10000);
    CHECK(s.limit_orders + s.market_orders + s.cancellations == 10000);
    CHECK(t.mids.size() == 10001);
    CHECK(t.rows.size() == 10000);
    CHECK(static_cast<std::int64_t>(t.mo_times.size()) == s.market_orders);
    CHECK(s.frac_limit + s.frac_market + s.frac_cancel == doctest::Approx(1.0));
    for (const auto& r : t.rows) CHECK(r.p_sell == 0.5); // alpha = 0
}
