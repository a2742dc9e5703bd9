#include "nmzi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "nmzi/errors.hpp"

namespace nmzi {

MeanSe mean_se(std::span<const double> v) {
    MeanSe r;
    if (v.empty()) return r;
    const auto n = static_cast<double>(v.size());
    r.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    if (v.size() < 2) return r;
    double ss = 0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.se = std::sqrt(ss / (n - 1) / n);
    return r;
}

MeanSe batch_mean_se(std::span<const double> v, std::size_t batches) {
    if (batches < 2 || v.size() < batches) return mean_se(v);
    const std::size_t len = v.size() / batches;
    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        means[b] = std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(b * len),
                                   v.begin() + static_cast<std::ptrdiff_t>((b + 1) * len), 0.0) /
                   static_cast<double>(len);
    }
    MeanSe r = mean_se(means);
    r.mean = mean_se(v).mean;
    return r;
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
        i = j + 1;
    }
    return r;
}

} // namespace

TestResult spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidConfiguration("spearman: lengths differ");
    const std::size_t n = x.size();
    if (n < 3) throw InvalidConfiguration("spearman: need at least 3 points");
    const std::vector<double> rx = ranks(x), ry = ranks(y);
    const double m = 0.5 * static_cast<double>(n + 1);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - m) * (ry[i] - m);
        sxx += (rx[i] - m) * (rx[i] - m);
        syy += (ry[i] - m) * (ry[i] - m);
    }
    TestResult r;
    if (sxx <= 0 || syy <= 0) return r;
    const double rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    r.statistic = rho;
    const double df = static_cast<double>(n - 2);
    if (std::abs(rho) >= 1.0) {
        r.p_value = 0.0;
        return r;
    }
    const double t = rho * std::sqrt(df / (1.0 - rho * rho));
    boost::math::students_t dist(df);
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    return r;
}

double kolmogorov_survival(double t) {
    if (t <= 0) return 1.0;
    if (t < 0.3) {
        // Small argument: use the theta-function form for the CDF.
        const double pi = 3.14159265358979323846;
        double cdf = 0;
        for (int k = 1; k <= 50; ++k) {
            const double m = (2 * k - 1) * pi;
            cdf += std::exp(-m * m / (8 * t * t));
        }
        return std::clamp(1.0 - std::sqrt(2 * pi) / t * cdf, 0.0, 1.0);
    }
    double s = 0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * t * t);
        s += (k % 2 == 1 ? term : -term);
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw InvalidConfiguration("ks test on an empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const auto na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    TestResult r;
    r.statistic = d;
    const double ne = std::sqrt(na * nb / (na + nb));
    r.p_value = kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d);
    return r;
}

std::vector<double> ewma_smooth(std::span<const double> v, double half_life) {
    if (!(half_life > 0)) throw InvalidConfiguration("smoothing half-life must be positive");
    std::vector<double> out(v.size());
    if (v.empty()) return out;
    const double w = 1.0 - std::exp2(-1.0 / half_life);
    out[0] = v[0];
    for (std::size_t i = 1; i < v.size(); ++i) out[i] = (1.0 - w) * out[i - 1] + w * v[i];
    return out;
}

} // namespace nmzi
