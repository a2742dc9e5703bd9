#include <doctest.h>

#include <cmath>
#include <vector>

#include "nmzi/analysis.hpp"
#include "nmzi/errors.hpp"

using namespace nmzi;

namespace {

std::vector<std::int64_t> schedule(std::int64_t q, std::int64_t interval) {
    std::vector<std::int64_t> t;
    for (std::int64_t j = 1; j <= q; ++j) t.push_back((interval + 1) * j - 1);
    return t;
}

} // namespace

TEST_CASE("description (i) is the event-by-event recursion") {
    const std::vector<double> mid{0, 0.5, 1, 1, 3, 2.5};
    const auto r = ewma_description_i(mid, 0.2);
    EwmaState s(0.2, 0);
    for (std::size_t t = 1; t < mid.size(); ++t) {
        s.update(static_cast<HalfTicks>(2 * mid[t]));
        CHECK(r[t] == doctest::Approx(s.rbar()));
    }
    CHECK(r[0] == 0.0);
}

TEST_CASE("description (ii) by hand") {
    // interval 2: children at 2, 5; updates at 3 and 6.
    const std::vector<double> mid{0, 1, 1, 4, 4, 6, 9, 9};
    const auto children = schedule(2, 2);
    const double g = std::exp(-0.5);
    const auto r = ewma_description_ii(mid, children, 2, 0.5);
    CHECK(r[0] == 0.0);
    CHECK(r[2] == 0.0);
    CHECK(r[3] == doctest::Approx(4.0));         // mid[3] - mid[0]
    CHECK(r[5] == doctest::Approx(4.0));         // frozen between children
    CHECK(r[6] == doctest::Approx(g * 4.0 + 5)); // + mid[6] - mid[3]
    CHECK(r[7] == doctest::Approx(g * 4.0 + 5));
}

TEST_CASE("the two descriptions agree on a linear path when beta1 interval is small") {
    const std::int64_t interval = 20, q = 2000;
    const double beta2 = 1e-2;
    std::vector<double> mid(static_cast<std::size_t>((interval + 1) * q + 1));
    for (std::size_t t = 0; t < mid.size(); ++t) mid[t] = 0.3 * static_cast<double>(t);
    const EquivalenceReport e = check_equivalence(mid, schedule(q, interval), interval, beta2);
    // Stationary values r / (1 - e^{-beta1}) and r (interval + 1) / (1 - e^{-beta2}).
    const double beta1 = beta2 / (interval + 1);
    CHECK(e.first.back() == doctest::Approx(0.3 / (1 - std::exp(-beta1))).epsilon(1e-3));
    CHECK(e.second.back() == doctest::Approx(0.3 * (interval + 1) / (1 - std::exp(-beta2))).epsilon(1e-3));
    CHECK(e.max_relative_deviation < 0.01);
}

TEST_CASE("stationary fit on a synthetic saturation") {
    const std::size_t q = 400;
    const double beta2 = 0.05;
    std::vector<double> rbar(q), mid(q);
    const double star = 20.0;
    for (std::size_t j = 1; j <= q; ++j) {
        rbar[j - 1] = star - star * std::exp(-0.04 * static_cast<double>(j));
        // Concave start, then linear with the slope the trend implies.
        mid[j - 1] = star * (1 - std::exp(-beta2)) * static_cast<double>(j) + 30.0 * (1 - std::exp(-0.1 * j));
    }
    // Tiny deterministic wiggle so the fit has a nonzero residual scale.
    for (std::size_t j = 0; j < q; ++j) rbar[j] += 1e-3 * ((j % 3) - 1.0);
    const StationaryReport s = fit_stationary(rbar, mid, 20, beta2);
    CHECK(s.rbar_star == doctest::Approx(star).epsilon(1e-3));
    CHECK(s.fit.c == doctest::Approx(0.04).epsilon(1e-2));
    CHECK(s.tau_star > 50);
    CHECK(s.tau_star < q);
    CHECK(s.stationary_reached);
    CHECK(s.t_star == doctest::Approx(21 * s.tau_star - 1));
    CHECK(s.r_star == doctest::Approx(star * (1 - std::exp(-beta2))).epsilon(1e-3));
    CHECK(s.proportionality_deviation < 1e-2);
}

TEST_CASE("stationary fit rejects too few children") {
    const std::vector<double> v(5, 1.0);
    CHECK_THROWS_AS(fit_stationary(v, v, 10, 0.1), FitFailed);
}

TEST_CASE("impact components on a sawtooth path") {
    // Each child jumps by J_k; the mid then falls by s per event until the next child.
    const std::int64_t interval = 10, q = 30;
    const double s = 0.2;
    const auto children = schedule(q, interval);
    std::vector<double> mid(static_cast<std::size_t>(children.back() + interval + 3), 0.0);
    std::vector<double> jumps;
    double m = 0;
    std::size_t next = 0;
    for (std::size_t t = 1; t < mid.size(); ++t) {
        // Event t - 1 happened between mid[t - 1] and mid[t].
        const auto e = static_cast<std::int64_t>(t - 1);
        if (next < children.size() && e == children[next]) {
            const double j = 5.0 - 0.1 * static_cast<double>(next);
            jumps.push_back(j);
            m += j;
            ++next;
        } else if (next > 0) {
            m -= s;
        }
        mid[t] = m;
    }
    const ImpactSeries c = impact_components(mid, children, interval, 50.0, 1);
    CHECK(c.kernel_fit);
    for (std::size_t k = 0; k < static_cast<std::size_t>(q); ++k) {
        CHECK(c.reversion[k] == doctest::Approx(s * interval));
        CHECK(c.rho[k] == doctest::Approx(s / c.eta[k]));
        CHECK(c.immediate_direct[k] == doctest::Approx(jumps[k]));
        CHECK(c.reversion_direct[k] == doctest::Approx(s * interval));
        if (k > 0) CHECK(c.immediate[k] == doctest::Approx(jumps[k]));
    }
    CHECK(std::isnan(c.immediate[0]));
    CHECK(c.valid == static_cast<std::size_t>(q - 1));
    // Net impact decreases with j, and so does its smoothed version.
    CHECK(c.net_smooth[q - 1] < c.net_smooth[1]);

    // A sell metaorder is the mirror image.
    std::vector<double> neg(mid);
    for (double& x : neg) x = -x;
    const ImpactSeries d = impact_components(neg, children, interval, 50.0, -1);
    CHECK(d.immediate[5] == doctest::Approx(c.immediate[5]));
}

TEST_CASE("short intervals fall back to direct estimates") {
    const auto children = schedule(5, 1);
    std::vector<double> mid(20);
    for (std::size_t t = 0; t < mid.size(); ++t) mid[t] = static_cast<double>(t);
    const ImpactSeries c = impact_components(mid, children, 1);
    CHECK_FALSE(c.kernel_fit);
    CHECK_FALSE(c.warning.empty());
    CHECK(c.immediate[2] == doctest::Approx(1.0));
}

TEST_CASE("post-execution decay fits recover synthetic exponentials") {
    const std::int64_t t_end = 99;
    const std::size_t n = 100 + 3000;
    const double a = 40, b = 2e-3, abar = 0.05, bt = 2.2e-3, c = 150;
    std::vector<double> rbar(n, 0.0), mid(n, 0.0);
    for (std::size_t t = 0; t < 100; ++t) mid[t] = 1.2 * static_cast<double>(t);
    for (std::size_t t = 100; t < n; ++t) {
        const double tp = static_cast<double>(t) - 100.0;
        rbar[t] = a * std::exp(-b * tp);
        mid[t] = c - abar / bt * std::exp(-bt * tp);
    }
    const DecayFit d = fit_post_execution(rbar, mid, t_end, 1e-4);
    CHECK(d.a == doctest::Approx(a).epsilon(1e-6));
    CHECK(d.b == doctest::Approx(b).epsilon(1e-6));
    CHECK(d.btilde == doctest::Approx(bt).epsilon(1e-6));
    CHECK(d.abar == doctest::Approx(abar).epsilon(1e-6));
    CHECK(d.c == doctest::Approx(c).epsilon(1e-6));
    CHECK(d.abar_predicted == doctest::Approx(a * (1 - std::exp(-1e-4) * std::exp(b))));
    CHECK(d.m_end == doctest::Approx(c - abar / bt));
    CHECK(d.peak_impact == doctest::Approx(c - abar / bt));
    CHECK(d.reversion_fraction == doctest::Approx((d.peak_impact - c) / d.peak_impact));
    CHECK(d.half_life == doctest::Approx(std::log(2.0) / bt).epsilon(1e-6));
}

TEST_CASE("theoretical k") { CHECK(theoretical_k(10.0, 0.9) == doctest::Approx(4.5)); }

TEST_CASE("response accumulator by hand") {
    const std::vector<HalfTicks> mids{0, 2, 4, 4, 6, 10};
    const std::vector<std::int64_t> times{0, 1, 4};
    const std::vector<std::int8_t> signs{1, -1, 1};
    ResponseAccumulator acc(2);
    acc.add(mids, times, signs);
    const ResponseCurve r = acc.curve();
    CHECK(r.market_orders == 2); // the last order lacks a full horizon
    CHECK(r.mean[0] == doctest::Approx(0.0));  // (+1, -1) ticks
    CHECK(r.mean[1] == doctest::Approx(0.5));  // (+2, -1) ticks
    CHECK(r.tau_mean(1, 2) == doctest::Approx(0.25));
}
