#pragma once

#include <cstddef>
#include <span>

namespace nmzi {

struct LinearFit {
    double intercept = 0;
    double slope = 0;
    double se_intercept = 0;
    double se_slope = 0;
    double r2 = 0;
    std::size_t n = 0;

    double operator()(double x) const noexcept { return intercept + slope * x; }
};

// Ordinary (or, with sigma, weighted) least squares y = intercept + slope x.
// Standard errors are scaled by the residual variance.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> sigma = {});

// y = a - b exp(-c x), or y = -b exp(-c x) without offset.
struct ExpFit {
    double a = 0;
    double b = 0;
    double c = 0;
    double sigma_a = 0;
    double sigma_b = 0;
    double sigma_c = 0;
    double residual_norm = 0; // sqrt of the (weighted) residual sum of squares
    std::size_t n = 0;
    bool with_offset = true;
    bool converged = false;   // false when the rate sits on the search boundary

    double operator()(double x) const noexcept;
};

struct ExpFitOptions {
    bool with_offset = true;
    // Rate search range, as multiples of 1 / (x_max - x_min).
    double rate_lo = 1e-3;
    double rate_hi = 1e3;
    int grid = 241;
};

// Nonlinear least squares by variable projection: for fixed c the model is
// linear in (a, b), so the residual is minimised over log c alone (log grid,
// then Brent). Covariances come from the full three-parameter Jacobian at
// the optimum, scaled by the reduced chi-square. Optional sigma weights
// points by 1 / sigma^2.
ExpFit fit_exponential(std::span<const double> x, std::span<const double> y, std::span<const double> sigma = {},
                       const ExpFitOptions& options = {});

} // namespace nmzi
