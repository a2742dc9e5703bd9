#include "nmzi/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nmzi/errors.hpp"
#include "nmzi/stats.hpp"

namespace nmzi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fit_diagnostics(const ExpFit& f) {
    return "a=" + std::to_string(f.a) + " b=" + std::to_string(f.b) + " c=" + std::to_string(f.c) +
           " residual=" + std::to_string(f.residual_norm) + " n=" + std::to_string(f.n);
}

} // namespace

std::vector<double> ewma_description_i(std::span<const double> mid, double beta1) {
    std::vector<double> out(mid.size(), 0.0);
    const double g = std::exp(-beta1);
    for (std::size_t t = 1; t < mid.size(); ++t) out[t] = g * out[t - 1] + (mid[t] - mid[t - 1]);
    return out;
}

std::vector<double> ewma_description_ii(std::span<const double> mid, std::span<const std::int64_t> child_times,
                                        std::int64_t interval, double beta2) {
    std::vector<double> out(mid.size(), 0.0);
    const double g = std::exp(-beta2);
    const auto n = static_cast<std::int64_t>(mid.size());
    double current = 0;
    std::int64_t filled = 0;
    for (std::int64_t t : child_times) {
        const std::int64_t s = t + 1;
        if (s >= n) break;
        for (; filled < s; ++filled) out[static_cast<std::size_t>(filled)] = current;
        const std::int64_t anchor = std::max<std::int64_t>(0, t - interval);
        current = g * current + (mid[static_cast<std::size_t>(s)] - mid[static_cast<std::size_t>(anchor)]);
    }
    for (; filled < n; ++filled) out[static_cast<std::size_t>(filled)] = current;
    return out;
}

EquivalenceReport check_equivalence(std::span<const double> mid, std::span<const std::int64_t> child_times,
                                    std::int64_t interval, double beta2) {
    const double beta1 = beta2 / static_cast<double>(interval + 1);
    const std::vector<double> r1 = ewma_description_i(mid, beta1);
    const std::vector<double> r2 = ewma_description_ii(mid, child_times, interval, beta2);
    EquivalenceReport rep;
    double scale = 0, worst = 0;
    for (std::int64_t t : child_times) {
        const auto s = static_cast<std::size_t>(t + 1);
        if (s >= mid.size()) break;
        rep.first.push_back(r1[s]);
        rep.second.push_back(r2[s]);
        scale = std::max(scale, std::abs(r2[s]));
        worst = std::max(worst, std::abs(r1[s] - r2[s]));
    }
    rep.max_relative_deviation = scale > 0 ? worst / scale : (worst > 0 ? kNaN : 0.0);
    return rep;
}

StationaryReport fit_stationary(std::span<const double> rbar_at_children, std::span<const double> mid_at_children,
                                std::int64_t interval, double beta2, const StationaryOptions& options) {
    const std::size_t q = rbar_at_children.size();
    if (mid_at_children.size() != q) throw InvalidConfiguration("rbar and mid child series differ in length");
    if (q < 10) throw FitFailed("stationary fit needs at least 10 children, got " + std::to_string(q));

    std::vector<double> j(q);
    std::iota(j.begin(), j.end(), 1.0);
    StationaryReport rep;
    rep.beta2 = beta2;
    rep.fit = fit_exponential(j, rbar_at_children);
    const ExpFit& f = rep.fit;
    if (!f.converged || !(f.c > 0)) throw FitFailed("no saturation in the trend indicator: " + fit_diagnostics(f));

    rep.rbar_star = f.a;
    rep.rbar_star_se = f.sigma_a;
    const double b = std::abs(f.b);
    if (b <= f.sigma_a) {
        rep.tau_star = 0;
    } else if (f.sigma_a <= 0) {
        rep.tau_star = static_cast<double>(q);
    } else {
        rep.tau_star = std::min(-std::log(f.sigma_a / b) / f.c, static_cast<double>(q));
    }
    rep.t_star = rep.tau_star > 0 ? static_cast<double>(interval + 1) * rep.tau_star - 1.0 : 0.0;

    // Children strictly after tau_star.
    auto first = static_cast<std::size_t>(std::floor(rep.tau_star)); // 0-based index of child floor(tau*) + 1
    const std::size_t need = std::max<std::size_t>(options.min_linear_points, 3);
    if (q - std::min(first, q) < need) {
        rep.stationary_reached = false;
        first = q > need ? q - need : 0;
    }
    const std::span<const double> xs(j.data() + first, q - first);
    const LinearFit lf = linear_fit(xs, mid_at_children.subspan(first));
    rep.r_star = lf.slope;
    rep.r_star_se = lf.se_slope;
    rep.linear_points = q - first;
    rep.predicted_r_star = rep.rbar_star * (1.0 - std::exp(-beta2));
    rep.proportionality_deviation =
        rep.r_star != 0 ? std::abs(rep.r_star - rep.predicted_r_star) / std::abs(rep.r_star) : kNaN;
    return rep;
}

ImpactSeries impact_components(std::span<const double> mid, std::span<const std::int64_t> child_times,
                               std::int64_t interval, double half_life, int sign) {
    ImpactSeries s;
    s.interval = interval;
    s.half_life = half_life;
    const std::size_t q = child_times.size();
    const auto n = static_cast<std::int64_t>(mid.size());
    auto m = [&](std::int64_t t) { return sign * mid[static_cast<std::size_t>(t)]; };

    s.eta.assign(q, kNaN);
    s.rho.assign(q, kNaN);
    s.immediate.assign(q, kNaN);
    s.reversion.assign(q, kNaN);
    s.net.assign(q, kNaN);
    s.immediate_direct.assign(q, kNaN);
    s.reversion_direct.assign(q, kNaN);

    std::vector<double> slope(q, kNaN);
    for (std::size_t k = 0; k < q; ++k) {
        const std::int64_t t = child_times[k];
        const std::int64_t end = t + 1 + interval; // last point of the window
        if (t + 1 < n && t >= 0) s.immediate_direct[k] = m(t + 1) - m(t);
        if (end < n) s.reversion_direct[k] = m(t + 1) - m(end);
        if (interval < 2 || end >= n) continue;
        std::vector<double> x(static_cast<std::size_t>(interval + 1)), y(x.size());
        for (std::size_t h = 0; h < x.size(); ++h) {
            x[h] = static_cast<double>(h);
            y[h] = m(t + 1 + static_cast<std::int64_t>(h));
        }
        const LinearFit lf = linear_fit(x, y);
        s.eta[k] = lf.intercept;
        slope[k] = lf.slope;
        s.rho[k] = lf.intercept != 0 ? -lf.slope / lf.intercept : kNaN;
    }

    const auto d = static_cast<double>(interval);
    if (interval < 2) {
        s.kernel_fit = false;
        s.warning = "trading interval below 2: per-window kernel fits impossible, using direct estimates";
        s.immediate = s.immediate_direct;
        s.reversion = s.reversion_direct;
    } else {
        for (std::size_t k = 0; k < q; ++k) {
            if (std::isnan(slope[k])) continue;
            s.reversion[k] = -slope[k] * d; // eta rho Delta
            if (k > 0 && !std::isnan(slope[k - 1])) s.immediate[k] = s.eta[k] - s.eta[k - 1] - slope[k - 1] * d;
        }
    }
    for (std::size_t k = 0; k < q; ++k) s.net[k] = s.immediate[k] - s.reversion[k];

    // Smooth the contiguous run of complete components.
    const std::size_t start = s.kernel_fit ? 1 : 0;
    std::size_t stop = start;
    while (stop < q && !std::isnan(s.net[stop])) ++stop;
    s.valid = stop > start ? stop - start : 0;
    s.immediate_smooth.assign(q, kNaN);
    s.reversion_smooth.assign(q, kNaN);
    s.net_smooth.assign(q, kNaN);
    if (s.valid > 0) {
        auto smooth_into = [&](const std::vector<double>& src, std::vector<double>& dst) {
            const auto sm = ewma_smooth(std::span<const double>(src.data() + start, s.valid), half_life);
            std::copy(sm.begin(), sm.end(), dst.begin() + static_cast<std::ptrdiff_t>(start));
        };
        smooth_into(s.immediate, s.immediate_smooth);
        smooth_into(s.reversion, s.reversion_smooth);
        smooth_into(s.net, s.net_smooth);
    }
    return s;
}

DecayFit fit_post_execution(std::span<const double> rbar, std::span<const double> mid, std::int64_t t_end,
                            double beta1, const DecayOptions& options) {
    if (rbar.size() != mid.size()) throw InvalidConfiguration("rbar and mid paths differ in length");
    const auto start = static_cast<std::size_t>(t_end + 1);
    if (t_end < -1 || start + 4 > mid.size()) throw FitFailed("post-execution window too short");
    const std::size_t n = mid.size() - start;

    std::vector<double> x(n);
    std::iota(x.begin(), x.end(), 0.0);
    auto tail = [&](std::span<const double> v) { return v.empty() ? v : v.subspan(start, n); };

    DecayFit d;
    d.points = n;
    ExpFitOptions no_offset;
    no_offset.with_offset = false;
    const ExpFit fr = fit_exponential(x, rbar.subspan(start, n), tail(options.rbar_se), no_offset);
    if (!fr.converged || !(fr.c > 0)) throw FitFailed("trend indicator decay fit did not converge: " + fit_diagnostics(fr));
    const ExpFit fm = fit_exponential(x, mid.subspan(start, n), tail(options.mid_se));
    if (!fm.converged || !(fm.c > 0)) throw FitFailed("mid-price decay fit did not converge: " + fit_diagnostics(fm));

    d.a = -fr.b;
    d.sigma_a = fr.sigma_b;
    d.b = fr.c;
    d.sigma_b = fr.sigma_c;
    d.c = fm.a;
    d.sigma_c = fm.sigma_a;
    d.btilde = fm.c;
    d.sigma_btilde = fm.sigma_c;
    d.abar = fm.b * fm.c;
    d.sigma_abar = std::hypot(fm.sigma_b * fm.c, fm.b * fm.sigma_c);

    d.gamma = std::exp(-beta1);
    d.abar_predicted = d.a * (1.0 - d.gamma * std::exp(d.b));
    d.m_end = mid[start];
    d.c_predicted = d.m_end + d.abar / d.btilde;
    d.rate_deviation = std::abs(d.btilde - d.b) / d.b;
    d.abar_deviation = d.abar != 0 ? std::abs(d.abar - d.abar_predicted) / std::abs(d.abar) : kNaN;
    d.m_pre = std::isnan(options.m_pre) ? mid[0] : options.m_pre;
    d.peak_impact = options.sign * (d.m_end - d.m_pre);
    d.permanent_impact = options.sign * (d.c - d.m_pre);
    d.reversion_fraction = d.peak_impact != 0 ? (d.peak_impact - d.permanent_impact) / d.peak_impact : kNaN;
    d.half_life = std::log(2.0) / d.btilde;
    return d;
}

double theoretical_k(double mean_first_gap, double p_qbest_one) { return 0.5 * p_qbest_one * mean_first_gap; }

double ResponseCurve::tau_mean(std::size_t tau_lo, std::size_t tau_hi) const {
    if (tau_lo < 1 || tau_hi < tau_lo || tau_hi > mean.size()) throw InvalidConfiguration("tau range outside curve");
    double s = 0;
    for (std::size_t t = tau_lo; t <= tau_hi; ++t) s += mean[t - 1];
    return s / static_cast<double>(tau_hi - tau_lo + 1);
}

ResponseAccumulator::ResponseAccumulator(std::size_t tau_max) : tau_max_(tau_max), sum_(tau_max, 0.0), sq_(tau_max, 0.0) {
    if (tau_max == 0) throw InvalidConfiguration("tau_max must be >= 1");
}

void ResponseAccumulator::add(std::span<const HalfTicks> mids, std::span<const std::int64_t> mo_times,
                              std::span<const std::int8_t> mo_signs) {
    if (mo_times.size() != mo_signs.size()) throw InvalidConfiguration("market order times and signs differ in length");
    for (std::size_t i = 0; i < mo_times.size(); ++i) {
        const auto t = static_cast<std::size_t>(mo_times[i]);
        if (mo_times[i] < 0 || t + tau_max_ >= mids.size()) continue;
        const double eps = mo_signs[i];
        for (std::size_t tau = 1; tau <= tau_max_; ++tau) {
            const double r = eps * 0.5 * static_cast<double>(mids[t + tau] - mids[t]);
            sum_[tau - 1] += r;
            sq_[tau - 1] += r * r;
        }
        ++count_;
    }
}

ResponseCurve ResponseAccumulator::curve() const {
    ResponseCurve c;
    c.market_orders = count_;
    c.mean.assign(tau_max_, kNaN);
    c.se.assign(tau_max_, kNaN);
    if (count_ == 0) return c;
    const auto n = static_cast<double>(count_);
    for (std::size_t i = 0; i < tau_max_; ++i) {
        c.mean[i] = sum_[i] / n;
        c.se[i] = count_ > 1 ? std::sqrt(std::max(0.0, (sq_[i] - n * c.mean[i] * c.mean[i]) / (n - 1)) / n) : 0.0;
    }
    return c;
}

ResponseCurve simulated_response(std::span<const SimTrajectory> trajectories, std::size_t tau_max) {
    ResponseAccumulator acc(tau_max);
    for (const auto& t : trajectories) acc.add(t.mids, t.mo_times, t.mo_signs);
    return acc.curve();
}

} // namespace nmzi
