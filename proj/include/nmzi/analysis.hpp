#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nmzi/book.hpp"
#include "nmzi/fit.hpp"
#include "nmzi/model.hpp"

namespace nmzi {

// ---- trend indicator, two ways -------------------------------------------

// Event-by-event recursion: out[0] = 0, out[t] = e^{-beta1} out[t-1] + mid[t] - mid[t-1].
std::vector<double> ewma_description_i(std::span<const double> mid, double beta1);

// Child-clocked version: constant between children; at s = t_j + 1 it is
// damped by e^{-beta2} and gains mid[t_j + 1] - mid[t_j - interval].
// Before the first update the value is 0.
std::vector<double> ewma_description_ii(std::span<const double> mid, std::span<const std::int64_t> child_times,
                                        std::int64_t interval, double beta2);

struct EquivalenceReport {
    std::vector<double> first;  // description (i) at t_j + 1
    std::vector<double> second; // description (ii) at t_j + 1
    double max_relative_deviation = 0; // max_j |first - second| / max |second|
};

// beta1 is taken as beta2 / (interval + 1).
EquivalenceReport check_equivalence(std::span<const double> mid, std::span<const std::int64_t> child_times,
                                    std::int64_t interval, double beta2);

// ---- stationary regime ---------------------------------------------------

struct StationaryReport {
    ExpFit fit;                  // rbar_j ~ a - b e^{-c j}, j = 1..Q
    double rbar_star = 0;        // a
    double rbar_star_se = 0;
    double tau_star = 0;         // children
    double t_star = 0;           // events
    double r_star = 0;           // mid-price slope per child after tau_star
    double r_star_se = 0;
    std::size_t linear_points = 0;
    bool stationary_reached = true; // false when too few children follow tau_star
    double beta2 = 0;
    // rbar_star * (1 - e^{-beta2}) against r_star
    double predicted_r_star = 0;
    double proportionality_deviation = 0; // |r* - predicted| / |r*|
};

struct StationaryOptions {
    std::size_t min_linear_points = 10;
};

// rbar and mid sampled right after each child (index j - 1 for child j).
StationaryReport fit_stationary(std::span<const double> rbar_at_children, std::span<const double> mid_at_children,
                                std::int64_t interval, double beta2, const StationaryOptions& options = {});

// ---- impact components ---------------------------------------------------

struct ImpactSeries {
    std::int64_t interval = 0;
    double half_life = 50;     // smoothing, in children
    bool kernel_fit = true;    // false when windows are too short (interval < 2)
    std::string warning;
    // Per child j = 1..Q (index j - 1). Kernel quantities need a complete
    // window after the child; entries without one are NaN.
    std::vector<double> eta, rho;
    std::vector<double> immediate, reversion, net;         // kernel-based I^I, I^R, I^I - I^R
    std::vector<double> immediate_direct, reversion_direct; // from raw path differences
    std::vector<double> immediate_smooth, reversion_smooth, net_smooth;
    std::size_t valid = 0; // children with kernel components (j = 2 .. valid + 1)
};

// `mid` is indexed by event from the start of the execution (index 0 = m_0),
// in ticks; `sign` orients the result so a buy metaorder has positive impact.
ImpactSeries impact_components(std::span<const double> mid, std::span<const std::int64_t> child_times,
                               std::int64_t interval, double half_life = 50.0, int sign = 1);

// ---- post-execution decay ------------------------------------------------

struct DecayFit {
    // rbar(t') = a e^{-b t'}
    double a = 0, b = 0, sigma_a = 0, sigma_b = 0;
    // mid(t') = c - (abar / btilde) e^{-btilde t'}
    double abar = 0, btilde = 0, c = 0, sigma_abar = 0, sigma_btilde = 0, sigma_c = 0;
    double gamma = 0;              // e^{-beta1}
    double abar_predicted = 0;     // a (1 - gamma e^{b})
    double c_predicted = 0;        // m_{T+1} + abar / btilde
    double rate_deviation = 0;     // |btilde - b| / b
    double abar_deviation = 0;     // |abar - abar_predicted| / |abar|
    double m_pre = 0;
    double m_end = 0;              // m_{T+1}
    double peak_impact = 0;        // sign (m_{T+1} - m_pre)
    double permanent_impact = 0;   // sign (c - m_pre)
    double reversion_fraction = 0; // (peak - permanent) / peak
    double half_life = 0;          // ln 2 / btilde
    std::size_t points = 0;
};

struct DecayOptions {
    std::span<const double> rbar_se; // optional fit weights, same indexing as the paths
    std::span<const double> mid_se;
    double m_pre = std::numeric_limits<double>::quiet_NaN(); // default: mid[0]
    int sign = 1;
};

// Paths indexed by event from the start of the execution; the fits use
// t' = t - (t_end + 1) for every t >= t_end + 1 in the paths.
DecayFit fit_post_execution(std::span<const double> rbar, std::span<const double> mid, std::int64_t t_end,
                            double beta1, const DecayOptions& options = {});

// ---- response function ---------------------------------------------------

// k = P(q_best = 1) <x1> / 2
double theoretical_k(double mean_first_gap, double p_qbest_one);

struct ResponseCurve {
    std::vector<double> mean; // index tau - 1
    std::vector<double> se;
    std::int64_t market_orders = 0;

    double tau_mean(std::size_t tau_lo, std::size_t tau_hi) const; // average over tau in [lo, hi]
};

// Accumulates R(tau) = <(m_{t + tau} - m_t) eps_t> over market orders, where
// mids[t] is the mid (half-ticks) before event t. Orders without a full
// horizon are skipped.
class ResponseAccumulator {
public:
    explicit ResponseAccumulator(std::size_t tau_max);
    void add(std::span<const HalfTicks> mids, std::span<const std::int64_t> mo_times,
             std::span<const std::int8_t> mo_signs);
    ResponseCurve curve() const;

private:
    std::size_t tau_max_;
    std::vector<double> sum_, sq_;
    std::int64_t count_ = 0;
};

ResponseCurve simulated_response(std::span<const SimTrajectory> trajectories, std::size_t tau_max);

} // namespace nmzi
