#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "nmzi/book.hpp"
#include "nmzi/rng.hpp"

namespace nmzi {

// Default grid size. See README ("Grid size") for how it was chosen.
inline constexpr int kDefaultLevels = 300;

// Poisson rates of the Zero Intelligence model, per market event.
struct ModelParams {
    double lambda = 0.0131; // limit orders per level
    double mu = 0.0441;     // market orders per side
    double delta = 0.1174;  // cancellations per resting order
    int q0 = 101;           // shares per unit order
    int levels = kDefaultLevels;

    void validate() const;
};

// Trend reaction of the Non-Markovian variant. alpha == 0 is plain ZI.
struct NmziParams {
    double alpha = 0.0;  // per tick of the trend indicator
    double beta1 = 1e-3; // inverse memory, per market event

    void validate() const;
    // beta1 = beta2 / (interval + 1)
    static NmziParams from_beta2(double alpha, double beta2, long interval);
    double beta2(long interval) const { return beta1 * static_cast<double>(interval + 1); }
};

struct RateTriple {
    double limit = 0;  // lambda * K
    double market = 0; // 2 mu
    double cancel = 0; // delta * n_orders
    double total = 0;
};

RateTriple event_rates(std::int64_t n_orders, const ModelParams& params);
RateTriple event_rates(const OrderBook& book, const ModelParams& params);

// Probability that a limit order is a sell given the trend indicator (ticks).
double sell_lo_probability(double alpha, double rbar) noexcept;

// Exponentially weighted mid-price return, in ticks:
//   rbar_t = exp(-beta1) * rbar_{t-1} + (m_t - m_{t-1}).
class EwmaState {
public:
    EwmaState(double beta1, HalfTicks initial_mid);

    double rbar() const noexcept { return rbar_; }
    HalfTicks last_mid() const noexcept { return last_mid_; }
    double decay() const noexcept { return decay_; }

    void update(HalfTicks new_mid) noexcept {
        rbar_ = decay_ * rbar_ + 0.5 * static_cast<double>(new_mid - last_mid_);
        last_mid_ = new_mid;
    }
    // Moves the reference mid without touching the indicator.
    void rebase(HalfTicks mid) noexcept { last_mid_ = mid; }
    // rbar <- decay * rbar + increment (ticks); used by the child-clocked variant.
    void jump(double decay, double increment) noexcept { rbar_ = decay * rbar_ + increment; }

private:
    double rbar_ = 0.0;
    HalfTicks last_mid_;
    double decay_;
};

EwmaState update_ewma(EwmaState state, HalfTicks new_mid) noexcept;

enum class EventKind : std::uint8_t { Limit = 0, Market = 1, Cancel = 2 };
std::string_view to_string(EventKind k) noexcept;

struct Event {
    EventKind kind = EventKind::Limit;
    Side side = Side::Buy;
    int level = -1;         // limit: grid index
    std::size_t rank = 0;   // cancel: position in the side's resting set
    double p_sell = 0.5;    // sell-LO probability in force when sampled
};

// Draws one event of the Algorithm-1 order flow from the current state.
Event sample_event(const OrderBook& book, const ModelParams& params, const NmziParams& nmzi,
                   const EwmaState& ewma, Rng& rng);

struct StepOutcome {
    EventKind kind = EventKind::Limit;
    Side side = Side::Buy;
    Ticks price = 0;
    HalfTicks mid_before = 0;
    HalfTicks mid_after = 0;
    double p_sell = 0.5;
    bool injected = false;
};

struct TrajectoryRow {
    std::int64_t t = 0;
    EventKind kind = EventKind::Limit;
    Side side = Side::Buy;
    Ticks price = 0;
    HalfTicks mid = 0;
    Ticks spread = 0;
    Ticks gap_bid = 0;
    Ticks gap_ask = 0;
    std::int64_t n_bid = 0;
    std::int64_t n_ask = 0;
    double rbar = 0;
    double p_sell = 0.5;
};

// Book + trend state + random stream of one simulation. Single-threaded;
// movable between threads while idle.
class Simulation {
public:
    Simulation(const ModelParams& params, const NmziParams& nmzi, std::uint64_t seed);

    const OrderBook& book() const noexcept { return book_; }
    const EwmaState& ewma() const noexcept { return ewma_; }
    const ModelParams& params() const noexcept { return params_; }
    const NmziParams& nmzi() const noexcept { return nmzi_; }
    std::int64_t events() const noexcept { return events_; }

    // Sample, apply, recenter, update the trend indicator.
    StepOutcome step();
    // Exogenous unit market order (metaorder child); recenters and updates
    // the trend indicator exactly like a sampled event.
    StepOutcome inject_market_order(Side side);

    TrajectoryRow row(const StepOutcome& o) const;

    // While frozen the trend indicator ignores mid-price moves; it then only
    // changes through apply_trend_update.
    void freeze_trend(bool frozen) noexcept { trend_frozen_ = frozen; }
    void apply_trend_update(double decay, double increment) noexcept { ewma_.jump(decay, increment); }

    // When set, every book mutation is appended to `log`.
    void record_deltas(std::vector<BookDelta>* log) noexcept { log_ = log; }

private:
    StepOutcome finish(const BookDelta& d, EventKind kind, double p_sell, bool injected);

    ModelParams params_;
    NmziParams nmzi_;
    OrderBook book_;
    EwmaState ewma_;
    Rng rng_;
    std::int64_t events_ = 0;
    std::vector<BookDelta>* log_ = nullptr;
    bool trend_frozen_ = false;
};

struct RunSummary {
    std::int64_t events = 0;
    std::int64_t limit_orders = 0;
    std::int64_t market_orders = 0;
    std::int64_t cancellations = 0;
    double mean_spread = 0;
    double mean_gap_bid = 0;
    double mean_gap_ask = 0;
    double mean_gap = 0;          // both sides pooled
    double p_qbest_one = 0;       // P(q_best = 1), both sides pooled
    double mean_n_orders = 0;
    double mean_gamma = 0;
    // time-averaged (Lambda, M, Delta_c) / Gamma
    double frac_limit = 0;
    double frac_market = 0;
    double frac_cancel = 0;
    std::int64_t truncated = 0;
    std::int64_t placed = 0;
};

struct SimTrajectory {
    std::vector<TrajectoryRow> rows;        // empty unless requested
    std::vector<HalfTicks> mids;            // mid before each recorded event, plus the final mid
    std::vector<std::int64_t> mo_times;     // recorded-event index of each market order
    std::vector<std::int8_t> mo_signs;      // +1 buy, -1 sell
    std::vector<Ticks> spreads;             // spread after each recorded event (if requested)
    RunSummary summary;
};

struct RunOptions {
    bool keep_rows = true;
    bool keep_spreads = false;
};

SimTrajectory run(const ModelParams& params, const NmziParams& nmzi, std::int64_t warmup,
                  std::int64_t iterations, std::uint64_t seed, const RunOptions& options = {});

} // namespace nmzi
