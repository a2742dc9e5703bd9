#include <doctest.h>

#include <cmath>
#include <vector>

#include "nmzi/errors.hpp"
#include "nmzi/master_eq.hpp"

using namespace nmzi;

namespace {

MasterEqContext context(int levels, double gap_bid, double gap_ask, double p_sell = 0.5) {
    ModelParams p;
    p.levels = levels;
    return MasterEqContext::from_params(p, 30.0, gap_bid, gap_ask, p_sell);
}

// Literal transcription of the spread balance: inflow from s - x_a and
// s - x_b, from every wider spread through an inside limit order, outflow
// through every possible move.
std::vector<double> spread_oracle(const std::vector<double>& p, const MasterEqContext& c, int xa, int xb) {
    const int smax = c.levels - 1;
    auto P = [&](int s) { return s >= 1 && s <= smax ? p[static_cast<std::size_t>(s - 1)] : 0.0; };
    std::vector<double> out(p.size());
    for (int s = 1; s <= smax; ++s) {
        double v = P(s);
        v += (c.mu + c.delta) / c.gamma * P(s - xa);
        v += (c.mu + c.delta) / c.gamma * P(s - xb);
        for (int sp = s + 1; sp <= smax; ++sp) v += 2 * c.lambda / c.gamma * P(sp);
        v -= P(s) * (2 * c.lambda * (s - 1) + 2 * c.mu + 2 * c.delta) / c.gamma;
        out[static_cast<std::size_t>(s - 1)] = v;
    }
    return out;
}

} // namespace

TEST_CASE("equilibrium spread at the reference calibration") {
    CHECK(equilibrium_spread(0.0131, 0.0441, 0.1174) == doctest::Approx(13.3282442748));
    CHECK_THROWS_AS(equilibrium_spread(0.0, 1.0, 1.0), InvalidConfiguration);
}

TEST_CASE("spread step matches the literal balance equation") {
    const MasterEqContext c = context(40, 3, 2);
    Distribution d = spread_point(12, 40);
    for (int step = 0; step < 5; ++step) {
        const std::vector<double> expect = spread_oracle(d.probs, c, 2, 3);
        d = spread_step(d, c);
        for (std::size_t i = 0; i < expect.size(); ++i) CHECK(d.probs[i] == doctest::Approx(expect[i]).epsilon(1e-13));
    }
}

TEST_CASE("spread evolution conserves probability") {
    const MasterEqContext c = context(300, 10.3, 9.7);
    const Evolution ev = evolve(spread_point(28, 300), c, 500, Quantity::Spread);
    CHECK(ev.final.total() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ev.stats.clipped == 0);
    CHECK(ev.mean.size() == 501);
}

TEST_CASE("spread first moment after one step") {
    const MasterEqContext c = context(100, 4, 6);
    const int s0 = 15;
    const Distribution d = spread_step(spread_point(s0, 100), c);
    double expect = s0 + (c.mu + c.delta) / c.gamma * (4 + 6);
    for (int s = 1; s < s0; ++s) expect += 2 * c.lambda / c.gamma * (s - s0);
    CHECK(d.mean() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("the spread equation does not depend on the sell probability") {
    MasterEqContext a = context(300, 10.2, 10.4, 0.5);
    MasterEqContext b = a;
    b.p_sell = 0.83;
    const Evolution ea = evolve(spread_point(28, 300), a, 100, Quantity::Spread);
    const Evolution eb = evolve(spread_point(28, 300), b, 100, Quantity::Spread);
    CHECK(ea.mean == eb.mean);
    CHECK(ea.final.probs == eb.final.probs);
}

TEST_CASE("fractional gaps split linearly between neighbouring integers") {
    const MasterEqContext lo = context(80, 2, 3), hi = context(80, 3, 3), mix = context(80, 2.25, 3);
    const Distribution p = spread_point(10, 80);
    const Distribution a = spread_step(p, lo), b = spread_step(p, hi), m = spread_step(p, mix);
    for (std::size_t i = 0; i < m.probs.size(); ++i) {
        CHECK(m.probs[i] == doctest::Approx(0.75 * a.probs[i] + 0.25 * b.probs[i]).epsilon(1e-14));
    }
}

TEST_CASE("mid-price first moment after one step") {
    const double ps = 0.7;
    const MasterEqContext c = context(100, 3, 5, ps);
    const int s = 9;
    const Distribution d = midprice_step(midprice_point(0, 100), c, s);
    // Half-ticks: an inside sell limit order lowers the mid by j in 1..s-1,
    // a buy raises it; emptied quotes move it by the gap.
    double expect = (c.mu + c.delta) / c.gamma * (5 - 3);
    for (int j = 1; j < s; ++j) expect += 2 * c.lambda / c.gamma * ((1 - ps) * j - ps * j);
    CHECK(d.mean() == doctest::Approx(0.5 * expect).epsilon(1e-12));
    CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("symmetric mid-price evolution has no drift") {
    MasterEqContext c = context(300, 10, 10, 0.5);
    c.spread_path = {20, 18, 16, 15, 14};
    const Evolution ev = evolve(midprice_point(0, 300), c, 40, Quantity::Midprice);
    for (double m : ev.mean) CHECK(std::abs(m) < 1e-12);
}

TEST_CASE("fractional spreads interpolate the mid-price step") {
    const MasterEqContext c = context(100, 3, 4, 0.6);
    const Distribution p = midprice_point(0, 100);
    const Distribution a = midprice_step(p, c, 7), b = midprice_step(p, c, 8), m = midprice_step(p, c, 7.4);
    for (std::size_t i = 0; i < m.probs.size(); ++i) {
        CHECK(m.probs[i] == doctest::Approx(0.6 * a.probs[i] + 0.4 * b.probs[i]).epsilon(1e-14));
    }
}

TEST_CASE("snapshots are taken at the requested steps") {
    const MasterEqContext c = context(60, 3, 3);
    const std::vector<std::int64_t> at{0, 3, 10};
    const Evolution ev = evolve(spread_point(20, 60), c, 10, Quantity::Spread, at);
    CHECK(ev.snapshot_steps == at);
    REQUIRE(ev.snapshots.size() == 3);
    CHECK(ev.snapshots[0].at(20) == 1.0);
    CHECK(ev.snapshots[2].mean() == doctest::Approx(ev.mean[10]));
}

TEST_CASE("mass leaking through the support edge is an error") {
    const MasterEqContext c = context(6, 4, 4);
    CHECK_THROWS_AS(evolve(spread_point(4, 6), c, 10, Quantity::Spread), NumericInstability);
}

TEST_CASE("invalid contexts are rejected") {
    MasterEqContext c = context(60, 0.5, 3);
    CHECK_THROWS_AS(spread_step(spread_point(5, 60), c), InvalidConfiguration);
    c = context(60, 3, 3);
    CHECK_THROWS_AS(spread_step(spread_point(5, 40), c), InvalidConfiguration);
    CHECK_THROWS_AS(evolve(midprice_point(0, 60), c, 3, Quantity::Midprice), InvalidConfiguration);
}
