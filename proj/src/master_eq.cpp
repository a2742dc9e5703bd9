#include "nmzi/master_eq.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nmzi/errors.hpp"

namespace nmzi {

namespace {

constexpr double kMaxLeak = 1e-6;
constexpr double kClipTolerance = 1e-12;

// dst[i + shift] += w * src[i] for a possibly fractional shift, split
// between floor(shift) and floor(shift) + 1. Mass leaving the support is
// dropped.
void add_shifted(const std::vector<double>& src, std::vector<double>& dst, double shift, double w) {
    const double fl = std::floor(shift);
    const double frac = shift - fl;
    const auto n = static_cast<std::int64_t>(src.size());
    for (int part = 0; part < 2; ++part) {
        const double pw = part == 0 ? 1.0 - frac : frac;
        if (pw == 0.0) continue;
        const auto k = static_cast<std::int64_t>(fl) + part;
        const std::int64_t lo = std::max<std::int64_t>(0, -k);
        const std::int64_t hi = std::min<std::int64_t>(n, n - k);
        for (std::int64_t i = lo; i < hi; ++i) {
            dst[static_cast<std::size_t>(i + k)] += w * pw * src[static_cast<std::size_t>(i)];
        }
    }
}

double sum(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s;
}

// Zero small negative round-off, restore the mass the equation says should
// remain, and enforce the leak bound.
void finalize(std::vector<double>& out, double expected_total, double before_clip, MasterEqStats* stats,
              double total_before) {
    bool clipped = false;
    for (double& x : out) {
        if (x < 0) {
            if (x < -kClipTolerance && stats) ++stats->clipped;
            x = 0;
            clipped = true;
        }
    }
    const double leak = total_before - before_clip;
    if (leak > kMaxLeak) {
        throw NumericInstability("master equation lost " + std::to_string(leak) +
                                 " probability mass in one step; enlarge the support");
    }
    if (clipped) {
        const double now = sum(out);
        if (now > 0) {
            for (double& x : out) x *= expected_total / now;
        }
    }
    if (stats) {
        stats->max_leak = std::max(stats->max_leak, leak);
        stats->lost_mass += std::max(leak, 0.0);
    }
}

} // namespace

Distribution Distribution::point(std::int64_t value, std::int64_t lo, std::int64_t hi, double unit) {
    if (hi < lo || value < lo || value > hi) throw InvalidConfiguration("point mass outside its support");
    Distribution d;
    d.origin = lo;
    d.unit = unit;
    d.probs.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
    d.probs[static_cast<std::size_t>(value - lo)] = 1.0;
    return d;
}

double Distribution::at(std::int64_t value) const noexcept {
    if (value < origin || value > last()) return 0.0;
    return probs[static_cast<std::size_t>(value - origin)];
}

double Distribution::total() const noexcept { return sum(probs); }

double Distribution::mean() const noexcept {
    double m = 0, t = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        m += static_cast<double>(origin + static_cast<std::int64_t>(i)) * probs[i];
        t += probs[i];
    }
    return t > 0 ? unit * m / t : 0.0;
}

void MasterEqContext::validate() const {
    if (!(lambda > 0) || !(mu >= 0) || !(delta >= 0)) throw InvalidConfiguration("master equation rates invalid");
    if (!(gamma > 0)) throw InvalidConfiguration("Gamma must be positive");
    if (!(gap_bid >= 1) || !(gap_ask >= 1)) throw InvalidConfiguration("first gaps must be >= 1");
    if (!(p_sell >= 0 && p_sell <= 1)) throw InvalidConfiguration("p_sell must lie in [0, 1]");
    if (levels < 4) throw InvalidConfiguration("grid size must be >= 4");
}

MasterEqContext MasterEqContext::from_params(const ModelParams& params, double mean_n_orders, double gap_bid,
                                             double gap_ask, double p_sell) {
    MasterEqContext c;
    c.lambda = params.lambda;
    c.mu = params.mu;
    c.delta = params.delta;
    c.levels = params.levels;
    c.gamma = params.lambda * params.levels + 2 * params.mu + params.delta * mean_n_orders;
    c.gap_bid = gap_bid;
    c.gap_ask = gap_ask;
    c.p_sell = p_sell;
    return c;
}

Distribution spread_step(const Distribution& p, const MasterEqContext& ctx, MasterEqStats* stats) {
    ctx.validate();
    if (p.origin != 1 || static_cast<int>(p.probs.size()) != ctx.levels - 1) {
        throw InvalidConfiguration("spread distribution must cover 1 .. K - 1");
    }
    const std::vector<double>& in = p.probs;
    const std::size_t n = in.size();
    const double g = ctx.gamma;
    const double jump = (ctx.mu + ctx.delta) / g;
    const double lo_rate = 2 * ctx.lambda / g;

    Distribution out = p;
    std::vector<double>& o = out.probs;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = static_cast<double>(i + 1);
        o[i] = in[i] * (1.0 - (2 * ctx.lambda * (s - 1) + 2 * ctx.mu + 2 * ctx.delta) / g);
    }
    // Limit orders inside a wider spread land uniformly on every smaller value.
    double tail = 0;
    for (std::size_t i = n; i-- > 0;) {
        o[i] += lo_rate * tail;
        tail += in[i];
    }
    // Aggressive market orders and best-quote cancellations widen by a gap.
    add_shifted(in, o, ctx.gap_ask, jump);
    add_shifted(in, o, ctx.gap_bid, jump);

    const double total_before = sum(in);
    const double raw = sum(o);
    finalize(o, std::min(raw, total_before), raw, stats, total_before);
    return out;
}

namespace {

std::vector<double> midprice_step_int(const std::vector<double>& in, const MasterEqContext& ctx, std::int64_t s) {
    const std::size_t n = in.size();
    const double g = ctx.gamma;
    const double jump = (ctx.mu + ctx.delta) / g;
    const double lo_rate = 2 * ctx.lambda / g;
    const auto width = static_cast<std::size_t>(std::max<std::int64_t>(s - 1, 0));

    std::vector<double> o(n);
    const double out_rate = (2 * ctx.lambda * static_cast<double>(s - 1) + 2 * ctx.mu + 2 * ctx.delta) / g;
    for (std::size_t i = 0; i < n; ++i) o[i] = in[i] * (1.0 - out_rate);

    // prefix[i] = sum of in[0 .. i-1]
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + in[i];
    auto range = [&](std::int64_t a, std::int64_t b) { // sum over [a, b], clipped to the support
        a = std::max<std::int64_t>(a, 0);
        b = std::min<std::int64_t>(b, static_cast<std::int64_t>(n) - 1);
        return b < a ? 0.0 : prefix[static_cast<std::size_t>(b + 1)] - prefix[static_cast<std::size_t>(a)];
    };
    if (width > 0) {
        const auto w = static_cast<std::int64_t>(width);
        for (std::size_t i = 0; i < n; ++i) {
            const auto m = static_cast<std::int64_t>(i);
            // Sell limit orders inside the spread lower the mid by j half-ticks,
            // buy orders raise it.
            o[i] += lo_rate * (ctx.p_sell * range(m + 1, m + w) + (1.0 - ctx.p_sell) * range(m - w, m - 1));
        }
    }
    add_shifted(in, o, -ctx.gap_bid, jump); // bid side emptied: mid falls by x_b half-ticks
    add_shifted(in, o, ctx.gap_ask, jump);  // ask side emptied: mid rises by x_a half-ticks
    return o;
}

} // namespace

Distribution midprice_step(const Distribution& p, const MasterEqContext& ctx, double spread, MasterEqStats* stats) {
    ctx.validate();
    if (!(spread >= 1)) throw InvalidConfiguration("spread must be >= 1 tick");
    const double fl = std::floor(spread);
    const double frac = spread - fl;
    Distribution out = p;
    std::vector<double> o = midprice_step_int(p.probs, ctx, static_cast<std::int64_t>(fl));
    if (frac > 0) {
        const std::vector<double> hi = midprice_step_int(p.probs, ctx, static_cast<std::int64_t>(fl) + 1);
        for (std::size_t i = 0; i < o.size(); ++i) o[i] = (1.0 - frac) * o[i] + frac * hi[i];
    }
    const double total_before = sum(p.probs);
    const double raw = sum(o);
    finalize(o, std::min(raw, total_before), raw, stats, total_before);
    out.probs = std::move(o);
    return out;
}

double equilibrium_spread(double lambda, double mu, double delta) {
    if (!(lambda > 0)) throw InvalidConfiguration("lambda must be positive");
    return (mu + delta) / lambda + 1.0;
}

double equilibrium_spread(const ModelParams& params) { return equilibrium_spread(params.lambda, params.mu, params.delta); }

Distribution spread_point(std::int64_t spread, int levels) { return Distribution::point(spread, 1, levels - 1, 1.0); }

Distribution midprice_point(std::int64_t mid_half_ticks, int levels) {
    const std::int64_t half_width = 6 * static_cast<std::int64_t>(levels - 1);
    return Distribution::point(mid_half_ticks, mid_half_ticks - half_width, mid_half_ticks + half_width, 0.5);
}

Evolution evolve(const Distribution& p0, const MasterEqContext& ctx, std::int64_t steps, Quantity which,
                 std::span<const std::int64_t> snapshot_steps) {
    if (steps < 0) throw InvalidConfiguration("step count must be >= 0");
    if (which == Quantity::Midprice && ctx.spread_path.empty()) {
        throw InvalidConfiguration("mid-price evolution needs a spread path");
    }
    Evolution ev;
    ev.mean.reserve(static_cast<std::size_t>(steps) + 1);
    Distribution cur = p0;
    auto snap = [&](std::int64_t k) {
        if (std::find(snapshot_steps.begin(), snapshot_steps.end(), k) != snapshot_steps.end()) {
            ev.snapshot_steps.push_back(k);
            ev.snapshots.push_back(cur);
        }
    };
    ev.mean.push_back(cur.mean());
    snap(0);
    for (std::int64_t k = 0; k < steps; ++k) {
        if (which == Quantity::Spread) {
            cur = spread_step(cur, ctx, &ev.stats);
        } else {
            const std::size_t idx = std::min(static_cast<std::size_t>(k), ctx.spread_path.size() - 1);
            cur = midprice_step(cur, ctx, ctx.spread_path[idx], &ev.stats);
        }
        ev.mean.push_back(cur.mean());
        snap(k + 1);
    }
    ev.final = std::move(cur);
    return ev;
}

} // namespace nmzi
