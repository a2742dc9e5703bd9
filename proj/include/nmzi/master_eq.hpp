#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nmzi/model.hpp"

namespace nmzi {

// Probability vector on consecutive integer values origin, origin + 1, ...
// `unit` converts a value to ticks (1 for spreads, 0.5 for half-tick mids).
struct Distribution {
    std::int64_t origin = 0;
    double unit = 1.0;
    std::vector<double> probs;

    static Distribution point(std::int64_t value, std::int64_t lo, std::int64_t hi, double unit = 1.0);

    std::int64_t last() const noexcept { return origin + static_cast<std::int64_t>(probs.size()) - 1; }
    double at(std::int64_t value) const noexcept;
    double total() const noexcept;
    double mean() const noexcept; // ticks
};

// Rates and frozen book statistics between two child market orders.
struct MasterEqContext {
    double lambda = 0.0131;
    double mu = 0.0441;
    double delta = 0.1174;
    double gamma = 0;        // event-rate normaliser lambda K + 2 mu + delta n_orders
    double gap_bid = 1;      // first gaps, ticks; fractional values are split
    double gap_ask = 1;      // between the neighbouring integers
    double p_sell = 0.5;     // probability that a limit order is a sell
    int levels = kDefaultLevels;
    std::vector<double> spread_path; // per-step spreads for the mid-price equation

    void validate() const;
    static MasterEqContext from_params(const ModelParams& params, double mean_n_orders, double gap_bid,
                                       double gap_ask, double p_sell);
};

struct MasterEqStats {
    std::int64_t clipped = 0; // negative entries below -1e-12 that were zeroed
    double max_leak = 0;      // largest mass lost in one step through the support edge
    double lost_mass = 0;
};

// One event of the spread equation on the support 1 .. K - 1.
Distribution spread_step(const Distribution& p, const MasterEqContext& ctx, MasterEqStats* stats = nullptr);

// One event of the mid-price equation (half-tick support) given the spread
// in force at that step (ticks; fractional values interpolate).
Distribution midprice_step(const Distribution& p, const MasterEqContext& ctx, double spread,
                           MasterEqStats* stats = nullptr);

// (mu + delta) / lambda + 1
double equilibrium_spread(double lambda, double mu, double delta);
double equilibrium_spread(const ModelParams& params);

// Spread support 1 .. K - 1 with all mass on `spread`.
Distribution spread_point(std::int64_t spread, int levels);
// Half-tick support of +- 6 (K - 1) half-ticks around `mid`.
Distribution midprice_point(std::int64_t mid_half_ticks, int levels);

enum class Quantity { Spread, Midprice };

struct Evolution {
    std::vector<double> mean; // ticks, index = step (entry 0 is the initial mean)
    std::vector<std::int64_t> snapshot_steps;
    std::vector<Distribution> snapshots;
    Distribution final;
    MasterEqStats stats;
};

// Iterates the chosen equation. The mid-price equation reads the spread
// for step k from ctx.spread_path[k] (the last value repeats when short).
Evolution evolve(const Distribution& p0, const MasterEqContext& ctx, std::int64_t steps, Quantity which,
                 std::span<const std::int64_t> snapshot_steps = {});

} // namespace nmzi
