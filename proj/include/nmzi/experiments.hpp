#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nmzi/analysis.hpp"
#include "nmzi/execution.hpp"

namespace nmzi {

struct AnalysisOptions {
    bool stationary = true;
    bool components = true;
    bool decay = true;
    double smoothing_half_life = 50.0;
    std::size_t min_linear_points = 10;
};

// Everything derived from one ensemble. A part that could not be computed
// is empty and its error message is kept.
struct ExecutionAnalysis {
    double beta2 = 0;
    std::vector<double> rbar_children;    // mean R-bar right after each child
    std::vector<double> rbar_ii_children; // description (ii) of the mean path
    std::vector<double> mid_children;     // mean mid right after each child
    std::optional<StationaryReport> stationary;
    std::optional<StationaryReport> stationary_ii;
    std::string stationary_error;
    std::string stationary_ii_error;
    double equivalence_deviation = 0;      // check_equivalence on the mean path
    std::optional<ImpactSeries> components;
    std::optional<DecayFit> decay;
    std::string decay_error;
};

ExecutionAnalysis analyze_execution(const ExecutionResult& result, const AnalysisOptions& options = {});

// Mean path from the start of the execution onwards (index 0 = m_0).
std::span<const double> path_from_start(const ExecutionResult& result, const std::vector<double>& path);

// One cell of the (beta2, alpha, interval, Q) grid.
struct SweepCell {
    double beta2 = 0;
    double alpha = 0;
    std::int64_t interval = 0;
    std::int64_t volume = 0;
    double beta1 = 0;
    ExecutionAnalysis analysis;
    double peak_impact = 0;
    double participation = 0;
    std::int64_t replaced = 0; // simulations rerun after emptying a book side
    std::string error;         // set when the ensemble could not be simulated
};

struct SweepGrid {
    std::vector<double> beta2{1e-3, 1e-2, 1e-1};
    std::vector<double> alpha{1e-4, 1e-3, 1e-2, 1e-1};
    std::vector<std::int64_t> interval{20, 50, 100};
    std::vector<std::int64_t> volume{2000};

    std::size_t size() const noexcept { return beta2.size() * alpha.size() * interval.size() * volume.size(); }
};

struct SweepSettings {
    ModelParams params;
    SweepGrid grid;
    std::int64_t sims = 200;
    std::uint64_t seed = 1;
    std::int64_t warmup = 20000;
    std::int64_t pre_window = 20000;
    std::int64_t post_window = -1; // < 0: 4 / beta1
    TrendClock trend_clock = TrendClock::Events;
    bool replace_exhausted = false;
    double max_replaced_fraction = 0.05;
    AnalysisOptions analysis;
};

SweepCell run_sweep_cell(const SweepSettings& settings, double beta2, double alpha, std::int64_t interval,
                         std::int64_t volume);
// Cells in grid order (beta2 outermost, then alpha, interval, Q).
std::vector<SweepCell> run_sweep(const SweepSettings& settings);

} // namespace nmzi
