#pragma once

#include <cstdint>
#include <vector>

#include "nmzi/book.hpp"
#include "nmzi/model.hpp"

namespace nmzi {

// Constant-speed metaorder: `volume` unit child market orders, one every
// `interval` background events. Times are relative to the start of the
// execution; child j (1-based) fires at event (interval + 1) * j - 1.
struct MetaorderSpec {
    std::int64_t volume = 100;        // Q, in units of q0
    std::int64_t interval = 50;       // background events between children
    Side side = Side::Buy;
    std::int64_t pre_window = 20000;  // events recorded before the start
    std::int64_t post_window = -1;    // events recorded after the last child; < 0 means 4 / beta1

    void validate() const;

    std::int64_t child_time(std::int64_t j) const noexcept { return (interval + 1) * j - 1; }
    // Event index of the last child (the execution duration T); -1 when Q == 0.
    std::int64_t duration() const noexcept { return volume * (interval + 1) - 1; }
    int sign() const noexcept { return sign_of(side); }
    std::int64_t resolved_post_window(const NmziParams& nmzi) const;
    std::vector<std::int64_t> child_times() const;
};

// How the trend indicator is updated during a metaorder run.
//   Events:   after every market event with beta1 (the model's own rule).
//   Children: only on the child clock, i.e. after events (interval + 1) k - 1,
//             k >= 1 (continuing after the last child), damped by
//             beta2 = beta1 (interval + 1) and fed the mid change since the
//             previous tick. Frozen at zero before the execution starts.
enum class TrendClock { Events, Children };

struct ExecutionOptions {
    std::int64_t warmup = 20000;  // events discarded before the pre-window
    bool keep_paths = false;      // keep every simulation's mid path
    bool keep_rbar_paths = false; // and its R-bar path
    bool book_paths = false;      // ensemble-mean spread, gaps and book size
    TrendClock trend_clock = TrendClock::Events;
    // A simulation that empties a book side aborts the ensemble unless
    // replacement is enabled: then it is rerun with a fresh seed, up to
    // max_replaced_fraction of the ensemble, and the seeds are reported.
    bool replace_exhausted = false;
    double max_replaced_fraction = 0.05;
};

// Seed of the attempt-th rerun (attempt >= 1) of the simulation with `seed`.
std::uint64_t replacement_seed(std::uint64_t seed, std::uint64_t attempt) noexcept;

// One simulation. Paths are indexed by i = e + pre_window where e is the
// event index relative to the start; entry i holds the state *before* event
// e (equivalently after event e - 1). The last entry is the state after the
// final recorded event.
struct SingleExecution {
    std::uint64_t seed = 0;
    std::vector<HalfTicks> mid;
    std::vector<double> rbar;
    std::vector<Ticks> spread;          // only with book_paths
    std::vector<Ticks> gap_bid;
    std::vector<Ticks> gap_ask;
    std::vector<std::int64_t> n_orders;
    std::int64_t market_orders_during = 0; // children + background MOs in [0, T]
    std::int64_t truncated = 0;
    std::int64_t placed = 0;
};

struct ExecutionResult {
    MetaorderSpec spec;
    ModelParams params;
    NmziParams nmzi;
    ExecutionOptions options;
    std::uint64_t base_seed = 0;
    std::int64_t n_sims = 0;
    std::int64_t post_window = 0; // resolved

    // Ensemble mean and standard error (ticks) of the absolute mid and R-bar.
    std::vector<double> mean_mid, se_mid;
    std::vector<double> mean_rbar, se_rbar;
    // With book_paths: ensemble means per recorded index.
    std::vector<double> mean_spread, mean_gap_bid, mean_gap_ask, mean_n_orders;

    // Per simulation.
    std::vector<std::uint64_t> seeds;
    std::vector<double> peak_impact;           // sign * (m_{T+1} - m_0), ticks
    std::vector<std::int64_t> market_orders_during;
    std::vector<std::vector<HalfTicks>> mid_paths;  // with keep_paths
    std::vector<std::vector<double>> rbar_paths;

    std::int64_t truncated = 0;
    std::int64_t placed = 0;
    std::vector<std::uint64_t> exhausted_seeds; // replaced attempts, in simulation order

    std::size_t length() const noexcept { return mean_mid.size(); }
    std::size_t index_of(std::int64_t event) const noexcept {
        return static_cast<std::size_t>(event + spec.pre_window);
    }
    double mid_at(std::int64_t event) const { return mean_mid.at(index_of(event)); }
    double rbar_at(std::int64_t event) const { return mean_rbar.at(index_of(event)); }
    // Event index of the first recorded state and one past the last.
    std::int64_t first_event() const noexcept { return -spec.pre_window; }
    std::int64_t end_event() const noexcept { return first_event() + static_cast<std::int64_t>(length()); }

    // P(tau) = sign * (<m_{(tau-1)(interval+1)}> - <m_0>) for tau = 1 .. Q + 1;
    // entry tau - 1 is the impact after tau - 1 children.
    std::vector<double> impact_curve() const;
    double mean_peak_impact() const;
    double mean_participation_rate() const;
};

// Percent of all market orders during [0, T] that were children.
double participation_rate(std::int64_t volume, std::int64_t market_orders_during);
double participation_rate(const ExecutionResult& result);

SingleExecution execute_metaorder(const ModelParams& params, const NmziParams& nmzi, const MetaorderSpec& spec,
                                  const ExecutionOptions& options, std::uint64_t seed);

// n_sims independent executions with seeds base_seed + i. Aggregation runs
// in simulation order so results do not depend on the worker count.
ExecutionResult run_ensemble(const ModelParams& params, const NmziParams& nmzi, const MetaorderSpec& spec,
                             const ExecutionOptions& options, std::int64_t n_sims, std::uint64_t base_seed,
                             std::size_t workers = 0);

} // namespace nmzi
