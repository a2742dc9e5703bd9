#include "nmzi/model.hpp"

#include <cmath>
#include <string>

#include "nmzi/errors.hpp"

namespace nmzi {

void ModelParams::validate() const {
    if (!(lambda > 0) || !(mu > 0) || !(delta > 0)) {
        throw InvalidConfiguration("lambda, mu and delta must be positive");
    }
    if (q0 < 1) throw InvalidConfiguration("q0 must be >= 1");
    if (levels < 4 || levels % 2 != 0) throw InvalidConfiguration("grid size K must be even and >= 4");
}

void NmziParams::validate() const {
    if (!(alpha >= 0)) throw InvalidConfiguration("alpha must be >= 0");
    if (!(beta1 > 0)) throw InvalidConfiguration("beta must be > 0");
}

NmziParams NmziParams::from_beta2(double alpha, double beta2, long interval) {
    if (interval < 0) throw InvalidConfiguration("trading interval must be >= 0");
    return NmziParams{alpha, beta2 / static_cast<double>(interval + 1)};
}

RateTriple event_rates(std::int64_t n_orders, const ModelParams& params) {
    RateTriple r;
    r.limit = params.lambda * params.levels;
    r.market = 2.0 * params.mu;
    r.cancel = params.delta * static_cast<double>(n_orders);
    r.total = r.limit + r.market + r.cancel;
    return r;
}

RateTriple event_rates(const OrderBook& book, const ModelParams& params) {
    ModelParams p = params;
    p.levels = book.levels();
    return event_rates(book.n_orders(), p);
}

double sell_lo_probability(double alpha, double rbar) noexcept {
    const double x = alpha * rbar;
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

EwmaState::EwmaState(double beta1, HalfTicks initial_mid) : last_mid_(initial_mid), decay_(std::exp(-beta1)) {}

EwmaState update_ewma(EwmaState state, HalfTicks new_mid) noexcept {
    state.update(new_mid);
    return state;
}

std::string_view to_string(EventKind k) noexcept {
    switch (k) {
    case EventKind::Limit: return "limit";
    case EventKind::Market: return "market";
    case EventKind::Cancel: return "cancel";
    }
    return "?";
}

Event sample_event(const OrderBook& book, const ModelParams& params, const NmziParams& nmzi,
                   const EwmaState& ewma, Rng& rng) {
    const std::int64_t n = book.n_orders();
    const RateTriple r = event_rates(book, params);
    const double u = rng.uniform() * r.total;

    Event ev;
    if (u < r.limit) {
        ev.kind = EventKind::Limit;
        ev.p_sell = sell_lo_probability(nmzi.alpha, ewma.rbar());
        ev.side = rng.bernoulli(ev.p_sell) ? Side::Sell : Side::Buy;
        const int k = book.levels();
        // Admissible levels: b1+1 .. K-1 for sells, 0 .. a1-1 for buys. With
        // one side empty the book can drift against the grid edge and leave
        // none, which only happens when the grid is far too small.
        const int lo = ev.side == Side::Sell ? book.best_bid_index() + 1 : 0;
        const int hi = ev.side == Side::Sell ? k : book.best_ask_index();
        if (hi <= lo) {
            throw LiquidityExhausted("no admissible level for a " + std::string(to_string(ev.side)) +
                                     " limit order (bid index " + std::to_string(book.best_bid_index()) +
                                     ", ask index " + std::to_string(book.best_ask_index()) + ", K = " +
                                     std::to_string(k) + "); increase the grid size");
        }
        ev.level = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo)));
    } else if (u < r.limit + r.market || n == 0) {
        ev.kind = EventKind::Market;
        ev.side = rng.bernoulli(0.5) ? Side::Buy : Side::Sell;
    } else {
        // Side picked with probability n_side / n, then a uniform order on
        // that side: a single uniform draw over all resting orders.
        ev.kind = EventKind::Cancel;
        const auto pick = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n)));
        const std::int64_t n_bid = book.count(Side::Buy);
        if (pick < n_bid) {
            ev.side = Side::Buy;
            ev.rank = static_cast<std::size_t>(pick);
        } else {
            ev.side = Side::Sell;
            ev.rank = static_cast<std::size_t>(pick - n_bid);
        }
    }
    return ev;
}

Simulation::Simulation(const ModelParams& params, const NmziParams& nmzi, std::uint64_t seed)
    : params_(params), nmzi_(nmzi), book_(params.levels), ewma_(nmzi.beta1, book_.mid()), rng_(seed) {
    params_.validate();
    nmzi_.validate();
}

StepOutcome Simulation::finish(const BookDelta& d, EventKind kind, double p_sell, bool injected) {
    if (log_) log_->push_back(d);
    const BookDelta rc = book_.recenter();
    if (log_ && rc.shift != 0) log_->push_back(rc);
    if (trend_frozen_) {
        ewma_.rebase(book_.mid());
    } else {
        ewma_.update(book_.mid());
    }
    ++events_;

    StepOutcome o;
    o.kind = kind;
    o.side = d.side;
    o.price = d.price;
    o.mid_before = d.mid_before;
    o.mid_after = d.mid_after;
    o.p_sell = p_sell;
    o.injected = injected;
    return o;
}

StepOutcome Simulation::step() {
    const Event ev = sample_event(book_, params_, nmzi_, ewma_, rng_);
    switch (ev.kind) {
    case EventKind::Limit:
        return finish(book_.place_limit_order(ev.side, ev.level), ev.kind, ev.p_sell, false);
    case EventKind::Market:
        return finish(book_.execute_market_order(ev.side), ev.kind, ev.p_sell, false);
    case EventKind::Cancel:
        return finish(book_.cancel_resting(ev.side, ev.rank), ev.kind, ev.p_sell, false);
    }
    throw InternalConsistency("unknown event kind");
}

StepOutcome Simulation::inject_market_order(Side side) {
    const double p = sell_lo_probability(nmzi_.alpha, ewma_.rbar());
    return finish(book_.execute_market_order(side), EventKind::Market, p, true);
}

TrajectoryRow Simulation::row(const StepOutcome& o) const {
    const Observables obs = book_.observables();
    TrajectoryRow r;
    r.t = events_ - 1;
    r.kind = o.kind;
    r.side = o.side;
    r.price = o.price;
    r.mid = obs.mid;
    r.spread = obs.spread;
    r.gap_bid = obs.gap_bid;
    r.gap_ask = obs.gap_ask;
    r.n_bid = obs.n_bid;
    r.n_ask = obs.n_ask;
    r.rbar = ewma_.rbar();
    r.p_sell = o.p_sell;
    return r;
}

SimTrajectory run(const ModelParams& params, const NmziParams& nmzi, std::int64_t warmup,
                  std::int64_t iterations, std::uint64_t seed, const RunOptions& options) {
    if (warmup < 0 || iterations < 0) throw InvalidConfiguration("iteration counts must be >= 0");
    Simulation sim(params, nmzi, seed);
    for (std::int64_t i = 0; i < warmup; ++i) sim.step();

    SimTrajectory traj;
    RunSummary& s = traj.summary;
    traj.mids.reserve(static_cast<std::size_t>(iterations) + 1);
    if (options.keep_rows) traj.rows.reserve(static_cast<std::size_t>(iterations));
    if (options.keep_spreads) traj.spreads.reserve(static_cast<std::size_t>(iterations));

    const std::int64_t truncated0 = sim.book().truncated();
    const std::int64_t placed0 = sim.book().orders_placed();
    double sum_spread = 0, sum_gb = 0, sum_ga = 0, sum_n = 0, sum_gamma = 0;
    double sum_fl = 0, sum_fm = 0, sum_fc = 0;
    std::int64_t q1 = 0, gap_obs_bid = 0, gap_obs_ask = 0;

    for (std::int64_t t = 0; t < iterations; ++t) {
        const OrderBook& b = sim.book();
        const RateTriple r = event_rates(b, params);
        sum_fl += r.limit / r.total;
        sum_fm += r.market / r.total;
        sum_fc += r.cancel / r.total;
        sum_gamma += r.total;
        sum_n += static_cast<double>(b.n_orders());
        traj.mids.push_back(b.mid());

        const StepOutcome o = sim.step();
        switch (o.kind) {
        case EventKind::Limit: ++s.limit_orders; break;
        case EventKind::Market:
            ++s.market_orders;
            traj.mo_times.push_back(t);
            traj.mo_signs.push_back(static_cast<std::int8_t>(sign_of(o.side)));
            break;
        case EventKind::Cancel: ++s.cancellations; break;
        }

        const Ticks spread = b.spread();
        sum_spread += static_cast<double>(spread);
        if (!b.empty(Side::Buy)) {
            sum_gb += static_cast<double>(b.gap(Side::Buy));
            ++gap_obs_bid;
            q1 += b.depth(b.best_bid_index()) == 1;
        }
        if (!b.empty(Side::Sell)) {
            sum_ga += static_cast<double>(b.gap(Side::Sell));
            ++gap_obs_ask;
            q1 += b.depth(b.best_ask_index()) == 1;
        }
        if (options.keep_spreads) traj.spreads.push_back(spread);
        if (options.keep_rows) traj.rows.push_back(sim.row(o));
    }
    traj.mids.push_back(sim.book().mid());

    s.events = iterations;
    if (iterations > 0) {
        const auto n = static_cast<double>(iterations);
        s.mean_spread = sum_spread / n;
        s.mean_gap_bid = gap_obs_bid ? sum_gb / static_cast<double>(gap_obs_bid) : 0.0;
        s.mean_gap_ask = gap_obs_ask ? sum_ga / static_cast<double>(gap_obs_ask) : 0.0;
        const auto gap_obs = static_cast<double>(gap_obs_bid + gap_obs_ask);
        s.mean_gap = gap_obs > 0 ? (sum_gb + sum_ga) / gap_obs : 0.0;
        s.p_qbest_one = gap_obs > 0 ? static_cast<double>(q1) / gap_obs : 0.0;
        s.mean_n_orders = sum_n / n;
        s.mean_gamma = sum_gamma / n;
        s.frac_limit = sum_fl / n;
        s.frac_market = sum_fm / n;
        s.frac_cancel = sum_fc / n;
    }
    s.truncated = sim.book().truncated() - truncated0;
    s.placed = sim.book().orders_placed() - placed0;
    return traj;
}

} // namespace nmzi
