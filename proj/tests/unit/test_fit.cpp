#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "nmzi/fit.hpp"
#include "nmzi/stats.hpp"

using namespace nmzi;

namespace {

std::vector<double> range(std::size_t n) {
    std::vector<double> x(n);
    std::iota(x.begin(), x.end(), 0.0);
    return x;
}

} // namespace

TEST_CASE("linear fit: exact line and closed-form oracle") {
    const std::vector<double> x{0, 1, 2, 3, 4};
    std::vector<double> y;
    for (double v : x) y.push_back(2.5 - 0.75 * v);
    const LinearFit f = linear_fit(x, y);
    CHECK(f.intercept == doctest::Approx(2.5));
    CHECK(f.slope == doctest::Approx(-0.75));
    CHECK(f.se_slope == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(f.r2 == doctest::Approx(1.0));

    // y = 1, 3, 2, 5: sxx = 5, sxy = 5.5 -> slope 1.1, intercept 1.1
    const std::vector<double> x2{0, 1, 2, 3}, y2{1, 3, 2, 5};
    const LinearFit g = linear_fit(x2, y2);
    CHECK(g.slope == doctest::Approx(1.1));
    CHECK(g.intercept == doctest::Approx(1.1));
    // residuals -0.1, 0.8, -1.3, 0.6 -> s^2 = 2.7 / 2, se_slope = sqrt(s^2 / 5)
    CHECK(g.se_slope == doctest::Approx(std::sqrt(1.35 / 5.0)));
}

TEST_CASE("weighted linear fit ignores a point with a huge sigma") {
    const std::vector<double> x{0, 1, 2, 3}, y{0, 1, 2, 100};
    const std::vector<double> s{1, 1, 1, 1e9};
    const LinearFit f = linear_fit(x, y, s);
    CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(f.intercept == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("exponential fit recovers noiseless parameters") {
    const auto x = range(300);
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 - 2.0 * std::exp(-0.05 * v));
    const ExpFit f = fit_exponential(x, y);
    CHECK(f.converged);
    CHECK(f.a == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(f.b == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(f.c == doctest::Approx(0.05).epsilon(1e-7));
}

TEST_CASE("exponential fit without offset") {
    const auto x = range(500);
    std::vector<double> y;
    for (double v : x) y.push_back(7.0 * std::exp(-0.01 * v)); // -b e^{-cx} with b = -7
    ExpFitOptions o;
    o.with_offset = false;
    const ExpFit f = fit_exponential(x, y, {}, o);
    CHECK(f.converged);
    CHECK(f.a == 0.0);
    CHECK(f.b == doctest::Approx(-7.0).epsilon(1e-7));
    CHECK(f.c == doctest::Approx(0.01).epsilon(1e-7));
}

TEST_CASE("exponential fit standard errors match the replica scatter") {
    const auto x = range(200);
    std::mt19937_64 gen(12345);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<double> as, cs;
    double mean_sigma_a = 0, mean_sigma_c = 0;
    const int reps = 300;
    for (int r = 0; r < reps; ++r) {
        std::vector<double> y;
        for (double v : x) y.push_back(1.0 - 0.8 * std::exp(-0.03 * v) + noise(gen));
        const ExpFit f = fit_exponential(x, y);
        REQUIRE(f.converged);
        as.push_back(f.a);
        cs.push_back(f.c);
        mean_sigma_a += f.sigma_a / reps;
        mean_sigma_c += f.sigma_c / reps;
    }
    auto sd = [](const std::vector<double>& v) {
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / static_cast<double>(v.size() - 1));
    };
    CHECK(sd(as) == doctest::Approx(mean_sigma_a).epsilon(0.2));
    CHECK(sd(cs) == doctest::Approx(mean_sigma_c).epsilon(0.2));
    CHECK(mean_se(as).mean == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("a straight line does not converge to a saturation") {
    const auto x = range(100);
    std::vector<double> y;
    for (double v : x) y.push_back(0.5 * v);
    const ExpFit f = fit_exponential(x, y);
    CHECK_FALSE(f.converged);
}

TEST_CASE("mean and standard error") {
    const std::vector<double> v{1, 2, 3, 4};
    const MeanSe m = mean_se(v);
    CHECK(m.mean == 2.5);
    CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}

TEST_CASE("batch means on iid data agree with the plain standard error") {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> g;
    std::vector<double> v(100000);
    for (double& x : v) x = g(gen);
    CHECK(batch_mean_se(v, 50).se == doctest::Approx(mean_se(v).se).epsilon(0.3));
}

TEST_CASE("Spearman correlation") {
    const std::vector<double> x{1, 2, 3, 4, 5, 6};
    const std::vector<double> up{2, 4, 5, 9, 10, 30}, down{6, 5, 4, 3, 2, 1};
    CHECK(spearman(x, up).statistic == doctest::Approx(1.0));
    CHECK(spearman(x, down).statistic == doctest::Approx(-1.0));
    // Ties take average ranks: ranks of {1,1,2,3} are {1.5,1.5,3,4}.
    const std::vector<double> a{1, 2, 3, 4}, b{1, 1, 2, 3};
    CHECK(spearman(a, b).statistic == doctest::Approx(0.9486832981).epsilon(1e-9));
    // sum d^2 = 44 -> rho = 1 - 6 * 44 / 990; t = rho sqrt(8 / (1 - rho^2)) on 8 dof
    std::vector<double> p{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, q{2, 1, 4, 3, 9, 5, 10, 7, 6, 8};
    const TestResult r = spearman(p, q);
    CHECK(r.statistic == doctest::Approx(1.0 - 6.0 * 44.0 / 990.0));
    CHECK(r.p_value == doctest::Approx(0.0158006).epsilon(1e-4));
}

TEST_CASE("Kolmogorov distribution and KS test") {
    CHECK(kolmogorov_survival(0.0) == doctest::Approx(1.0));
    CHECK(kolmogorov_survival(1.36) == doctest::Approx(0.0494859).epsilon(1e-4));
    CHECK(kolmogorov_survival(1.63) == doctest::Approx(0.0098464).epsilon(1e-4));
    std::mt19937_64 gen(1);
    std::normal_distribution<double> g;
    std::vector<double> a(2000), b(2000), c(2000);
    for (auto& x : a) x = g(gen);
    for (auto& x : b) x = g(gen);
    for (auto& x : c) x = g(gen) + 0.3;
    CHECK(ks_two_sample(a, b).p_value > 0.01);
    CHECK(ks_two_sample(a, c).p_value < 1e-6);
}

TEST_CASE("EWMA smoothing") {
    const std::vector<double> v{4, 4, 4};
    for (double x : ewma_smooth(v, 10)) CHECK(x == doctest::Approx(4.0));
    const std::vector<double> step{0, 1};
    const auto s = ewma_smooth(step, 1.0); // weight 1/2 for a one-sample half-life
    CHECK(s[0] == 0.0);
    CHECK(s[1] == doctest::Approx(0.5));
}
