#include "nmzi/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "nmzi/errors.hpp"

namespace nmzi {

namespace {

std::vector<double> weights_from(std::span<const double> sigma, std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (sigma.empty()) return w;
    if (sigma.size() != n) throw InvalidConfiguration("sigma length does not match data");
    double smallest = std::numeric_limits<double>::infinity();
    for (double s : sigma) {
        if (s > 0 && std::isfinite(s)) smallest = std::min(smallest, s);
    }
    if (!std::isfinite(smallest)) return w; // all zero: unweighted
    for (std::size_t i = 0; i < n; ++i) {
        const double s = sigma[i] > 0 && std::isfinite(sigma[i]) ? sigma[i] : smallest;
        w[i] = 1.0 / (s * s);
    }
    return w;
}

void check_finite(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidConfiguration("x and y lengths differ");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw FitFailed("non-finite input at point " + std::to_string(i));
    }
}

// Linear sub-problem of the exponential model at fixed rate.
struct Projection {
    double p = 0;
    double q = 0; // coefficient of exp(-c (x - x0))
    double rss = 0;
};

} // namespace

LinearFit linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> sigma) {
    check_finite(x, y);
    const std::size_t n = x.size();
    if (n < 2) throw FitFailed("linear fit needs at least two points");
    const std::vector<double> w = weights_from(sigma, n);
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * dy;
        syy += w[i] * dy * dy;
    }
    if (!(sxx > 0)) throw FitFailed("linear fit with constant abscissa");
    LinearFit f;
    f.n = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    const double rss = std::max(0.0, syy - f.slope * sxy);
    f.r2 = syy > 0 ? 1.0 - rss / syy : 1.0;
    if (n > 2) {
        // Weights are relative: rescale to the observed scatter.
        const double s2 = rss / static_cast<double>(n - 2);
        f.se_slope = std::sqrt(s2 / sxx);
        f.se_intercept = std::sqrt(s2 * (1.0 / sw + mx * mx / sxx));
    }
    return f;
}

double ExpFit::operator()(double x) const noexcept { return (with_offset ? a : 0.0) - b * std::exp(-c * x); }

ExpFit fit_exponential(std::span<const double> x, std::span<const double> y, std::span<const double> sigma,
                       const ExpFitOptions& options) {
    check_finite(x, y);
    const std::size_t n = x.size();
    const std::size_t k = options.with_offset ? 3 : 2;
    if (n < k + 1) throw FitFailed("exponential fit needs at least " + std::to_string(k + 1) + " points");
    const std::vector<double> w = weights_from(sigma, n);
    const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
    const double x0 = *xmin_it;
    const double span = *xmax_it - x0;
    if (!(span > 0)) throw FitFailed("exponential fit with constant abscissa");

    double sw = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        sy += w[i] * y[i];
    }
    const double my = sy / sw;
    double syy = 0, syy0 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        syy += w[i] * (y[i] - my) * (y[i] - my);
        syy0 += w[i] * y[i] * y[i];
    }

    auto project = [&](double c) {
        Projection pr;
        if (options.with_offset) {
            double sg = 0;
            for (std::size_t i = 0; i < n; ++i) sg += w[i] * std::exp(-c * (x[i] - x0));
            const double mg = sg / sw;
            double sgg = 0, sgy = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double dg = std::exp(-c * (x[i] - x0)) - mg;
                sgg += w[i] * dg * dg;
                sgy += w[i] * dg * (y[i] - my);
            }
            if (sgg <= 1e-300) {
                pr.p = my;
                pr.rss = syy;
                return pr;
            }
            pr.q = sgy / sgg;
            pr.p = my - pr.q * mg;
            pr.rss = std::max(0.0, syy - pr.q * sgy);
        } else {
            double sgg = 0, sgy = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double g = std::exp(-c * (x[i] - x0));
                sgg += w[i] * g * g;
                sgy += w[i] * g * y[i];
            }
            pr.q = sgg > 0 ? sgy / sgg : 0.0;
            pr.rss = std::max(0.0, syy0 - pr.q * sgy);
        }
        return pr;
    };

    const double lo = std::log(options.rate_lo / span);
    const double hi = std::log(options.rate_hi / span);
    const int grid = std::max(options.grid, 3);
    int best = 0;
    double best_rss = std::numeric_limits<double>::infinity();
    for (int g = 0; g < grid; ++g) {
        const double lc = lo + (hi - lo) * g / (grid - 1);
        const double rss = project(std::exp(lc)).rss;
        if (rss < best_rss) {
            best_rss = rss;
            best = g;
        }
    }
    const double step = (hi - lo) / (grid - 1);
    const double a_lo = lo + step * std::max(best - 1, 0);
    const double a_hi = lo + step * std::min(best + 1, grid - 1);
    const auto [log_c, rss] = boost::math::tools::brent_find_minima(
        [&](double lc) { return project(std::exp(lc)).rss; }, a_lo, a_hi, 52);
    (void)rss;

    const double c = std::exp(log_c);
    const Projection pr = project(c);
    ExpFit f;
    f.n = n;
    f.with_offset = options.with_offset;
    f.c = c;
    f.a = options.with_offset ? pr.p : 0.0;
    // q exp(-c (x - x0)) = -b exp(-c x)
    f.b = -pr.q * std::exp(c * x0);
    f.residual_norm = std::sqrt(pr.rss);
    f.converged = best > 0 && best < grid - 1 && std::isfinite(f.a) && std::isfinite(f.b);

    // Jacobian of y = a - b exp(-c x) in (a, b, c), centred at x0 for conditioning.
    const Eigen::Index kk = static_cast<Eigen::Index>(k);
    Eigen::MatrixXd jtj = Eigen::MatrixXd::Zero(kk, kk);
    const double bq = -pr.q; // b at x0
    for (std::size_t i = 0; i < n; ++i) {
        const double g = std::exp(-c * (x[i] - x0));
        Eigen::VectorXd row(kk);
        Eigen::Index col = 0;
        if (options.with_offset) row(col++) = 1.0;
        row(col++) = -g;
        row(col) = bq * (x[i] - x0) * g;
        jtj += w[i] * row * row.transpose();
    }
    const double s2 = n > k ? pr.rss / static_cast<double>(n - k) : 0.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
    if (!lu.isInvertible()) {
        f.converged = false;
        return f;
    }
    const Eigen::MatrixXd cov = s2 * lu.inverse();
    Eigen::Index col = 0;
    if (options.with_offset) f.sigma_a = std::sqrt(std::max(0.0, cov(col, col))), ++col;
    const double e0 = std::exp(c * x0);
    // b = b0 e^{c x0}: propagate the (b0, c) block.
    const double var_b0 = cov(col, col), var_c = cov(col + 1, col + 1), cov_bc = cov(col, col + 1);
    const double db0 = e0, dc = bq * x0 * e0;
    f.sigma_b = std::sqrt(std::max(0.0, db0 * db0 * var_b0 + dc * dc * var_c + 2 * db0 * dc * cov_bc));
    f.sigma_c = std::sqrt(std::max(0.0, var_c));
    return f;
}

} // namespace nmzi
