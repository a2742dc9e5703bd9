#include "nmzi/experiments.hpp"

#include <cmath>

#include "nmzi/errors.hpp"

namespace nmzi {

std::span<const double> path_from_start(const ExecutionResult& result, const std::vector<double>& path) {
    const std::size_t i0 = result.index_of(0);
    if (path.size() < i0) throw InvalidConfiguration("path shorter than the pre-window");
    return std::span<const double>(path).subspan(i0);
}

ExecutionAnalysis analyze_execution(const ExecutionResult& result, const AnalysisOptions& options) {
    ExecutionAnalysis out;
    const MetaorderSpec& spec = result.spec;
    const double beta2 = result.nmzi.beta2(spec.interval);
    out.beta2 = beta2;
    const std::vector<std::int64_t> children = spec.child_times();
    const auto mid = path_from_start(result, result.mean_mid);
    const auto rbar = path_from_start(result, result.mean_rbar);
    const std::vector<double> rbar_ii = ewma_description_ii(mid, children, spec.interval, beta2);

    for (std::int64_t t : children) {
        const auto s = static_cast<std::size_t>(t + 1);
        out.rbar_children.push_back(rbar[s]);
        out.rbar_ii_children.push_back(rbar_ii[s]);
        out.mid_children.push_back(mid[s]);
    }
    out.equivalence_deviation = check_equivalence(mid, children, spec.interval, beta2).max_relative_deviation;

    if (options.stationary && children.size() >= 10) {
        StationaryOptions so;
        so.min_linear_points = options.min_linear_points;
        try {
            out.stationary = fit_stationary(out.rbar_children, out.mid_children, spec.interval, beta2, so);
        } catch (const FitFailed& e) {
            out.stationary_error = e.what();
        }
        try {
            out.stationary_ii = fit_stationary(out.rbar_ii_children, out.mid_children, spec.interval, beta2, so);
        } catch (const FitFailed& e) {
            out.stationary_ii_error = e.what();
        }
    } else if (options.stationary) {
        out.stationary_error = out.stationary_ii_error = "fewer than 10 children";
    }
    if (options.components && !children.empty()) {
        out.components = impact_components(mid, children, spec.interval, options.smoothing_half_life, spec.sign());
    }
    if (options.decay && result.post_window > 0) {
        DecayOptions d;
        const auto rbar_se = path_from_start(result, result.se_rbar);
        const auto mid_se = path_from_start(result, result.se_mid);
        d.rbar_se = rbar_se;
        d.mid_se = mid_se;
        d.m_pre = mid[0];
        d.sign = spec.sign();
        try {
            out.decay = fit_post_execution(rbar, mid, spec.duration(), result.nmzi.beta1, d);
        } catch (const FitFailed& e) {
            out.decay_error = e.what();
        }
    }
    return out;
}

SweepCell run_sweep_cell(const SweepSettings& settings, double beta2, double alpha, std::int64_t interval,
                         std::int64_t volume) {
    SweepCell cell;
    cell.beta2 = beta2;
    cell.alpha = alpha;
    cell.interval = interval;
    cell.volume = volume;
    const NmziParams nmzi = NmziParams::from_beta2(alpha, beta2, interval);
    cell.beta1 = nmzi.beta1;

    MetaorderSpec spec;
    spec.volume = volume;
    spec.interval = interval;
    spec.pre_window = settings.pre_window;
    spec.post_window = settings.post_window;
    ExecutionOptions eo;
    eo.warmup = settings.warmup;
    eo.trend_clock = settings.trend_clock;
    eo.replace_exhausted = settings.replace_exhausted;
    eo.max_replaced_fraction = settings.max_replaced_fraction;
    ExecutionResult r;
    try {
        r = run_ensemble(settings.params, nmzi, spec, eo, settings.sims, settings.seed);
    } catch (const LiquidityExhausted& e) {
        // One cell emptying a book side does not invalidate the others.
        cell.error = e.what();
        return cell;
    }
    cell.analysis = analyze_execution(r, settings.analysis);
    cell.peak_impact = r.mean_peak_impact();
    cell.participation = r.mean_participation_rate();
    cell.replaced = static_cast<std::int64_t>(r.exhausted_seeds.size());
    return cell;
}

std::vector<SweepCell> run_sweep(const SweepSettings& settings) {
    std::vector<SweepCell> cells;
    cells.reserve(settings.grid.size());
    for (double b2 : settings.grid.beta2) {
        for (double a : settings.grid.alpha) {
            for (std::int64_t d : settings.grid.interval) {
                for (std::int64_t q : settings.grid.volume) cells.push_back(run_sweep_cell(settings, b2, a, d, q));
            }
        }
    }
    return cells;
}

} // namespace nmzi
