#include "nmzi/execution.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <string>

#include "nmzi/errors.hpp"
#include "nmzi/parallel.hpp"

namespace nmzi {

void MetaorderSpec::validate() const {
    if (volume < 0) throw InvalidConfiguration("metaorder volume must be >= 0");
    if (interval < 0) throw InvalidConfiguration("trading interval must be >= 0");
    if (pre_window < 0) throw InvalidConfiguration("pre-window must be >= 0");
}

std::int64_t MetaorderSpec::resolved_post_window(const NmziParams& nmzi) const {
    if (post_window >= 0) return post_window;
    return static_cast<std::int64_t>(std::ceil(4.0 / nmzi.beta1));
}

std::vector<std::int64_t> MetaorderSpec::child_times() const {
    std::vector<std::int64_t> t(static_cast<std::size_t>(volume));
    for (std::int64_t j = 1; j <= volume; ++j) t[static_cast<std::size_t>(j - 1)] = child_time(j);
    return t;
}

double participation_rate(std::int64_t volume, std::int64_t market_orders_during) {
    if (market_orders_during <= 0) return volume == 0 ? 0.0 : 100.0;
    return 100.0 * static_cast<double>(volume) / static_cast<double>(market_orders_during);
}

double participation_rate(const ExecutionResult& result) { return result.mean_participation_rate(); }

std::vector<double> ExecutionResult::impact_curve() const {
    std::vector<double> p(static_cast<std::size_t>(spec.volume + 1));
    const double m0 = mid_at(0);
    for (std::int64_t tau = 1; tau <= spec.volume + 1; ++tau) {
        p[static_cast<std::size_t>(tau - 1)] = spec.sign() * (mid_at((tau - 1) * (spec.interval + 1)) - m0);
    }
    return p;
}

double ExecutionResult::mean_peak_impact() const {
    if (peak_impact.empty()) return 0.0;
    return std::accumulate(peak_impact.begin(), peak_impact.end(), 0.0) / static_cast<double>(peak_impact.size());
}

double ExecutionResult::mean_participation_rate() const {
    if (market_orders_during.empty()) return 0.0;
    double s = 0;
    for (auto n : market_orders_during) s += participation_rate(spec.volume, n);
    return s / static_cast<double>(market_orders_during.size());
}

SingleExecution execute_metaorder(const ModelParams& params, const NmziParams& nmzi, const MetaorderSpec& spec,
                                  const ExecutionOptions& options, std::uint64_t seed) {
    spec.validate();
    if (options.warmup < 0) throw InvalidConfiguration("warm-up must be >= 0");
    const std::int64_t post = spec.resolved_post_window(nmzi);
    const std::int64_t last = spec.duration() + post; // last recorded event
    const auto length = static_cast<std::size_t>(spec.pre_window + last + 2);

    Simulation sim(params, nmzi, seed);
    const bool child_clock = options.trend_clock == TrendClock::Children;
    sim.freeze_trend(child_clock);
    const double clock_decay = std::exp(-nmzi.beta2(spec.interval));
    HalfTicks clock_anchor = 0;
    for (std::int64_t i = 0; i < options.warmup; ++i) sim.step();

    SingleExecution out;
    out.seed = seed;
    out.mid.reserve(length);
    out.rbar.reserve(length);
    if (options.book_paths) {
        out.spread.reserve(length);
        out.gap_bid.reserve(length);
        out.gap_ask.reserve(length);
        out.n_orders.reserve(length);
    }
    const std::int64_t truncated0 = sim.book().truncated();
    const std::int64_t placed0 = sim.book().orders_placed();

    auto record = [&] {
        const OrderBook& b = sim.book();
        out.mid.push_back(b.mid());
        out.rbar.push_back(sim.ewma().rbar());
        if (options.book_paths) {
            out.spread.push_back(b.spread());
            out.gap_bid.push_back(b.gap(Side::Buy));
            out.gap_ask.push_back(b.gap(Side::Sell));
            out.n_orders.push_back(b.n_orders());
        }
    };

    const std::int64_t stride = spec.interval + 1;
    const std::int64_t t_end = spec.duration();
    for (std::int64_t e = -spec.pre_window; e <= last; ++e) {
        record();
        if (e == 0) clock_anchor = sim.book().mid();
        // Children occupy the slots e = stride * j - 1, j = 1..Q.
        const bool on_clock = e >= 0 && (e + 1) % stride == 0;
        const bool child = on_clock && e <= t_end;
        const StepOutcome o = child ? sim.inject_market_order(spec.side) : sim.step();
        if (e >= 0 && e <= t_end && o.kind == EventKind::Market) ++out.market_orders_during;
        if (child_clock && on_clock) {
            const HalfTicks m = sim.book().mid();
            sim.apply_trend_update(clock_decay, 0.5 * static_cast<double>(m - clock_anchor));
            clock_anchor = m;
        }
    }
    record();

    out.truncated = sim.book().truncated() - truncated0;
    out.placed = sim.book().orders_placed() - placed0;
    return out;
}

namespace {

struct Accumulator {
    explicit Accumulator(std::size_t n, bool book)
        : mid_sum(n, 0), mid_sq(n, 0), rbar_sum(n, 0.0), rbar_sq(n, 0.0) {
        if (book) {
            spread.assign(n, 0);
            gap_bid.assign(n, 0);
            gap_ask.assign(n, 0);
            n_orders.assign(n, 0);
        }
    }

    void add(const SingleExecution& s) {
        if (s.mid.size() != mid_sum.size()) throw InternalConsistency("ensemble paths are not aligned");
        for (std::size_t i = 0; i < mid_sum.size(); ++i) {
            const std::int64_t m = s.mid[i];
            mid_sum[i] += m;
            mid_sq[i] += static_cast<__int128>(m) * m;
            rbar_sum[i] += s.rbar[i];
            rbar_sq[i] += s.rbar[i] * s.rbar[i];
        }
        for (std::size_t i = 0; i < spread.size(); ++i) {
            spread[i] += s.spread[i];
            gap_bid[i] += s.gap_bid[i];
            gap_ask[i] += s.gap_ask[i];
            n_orders[i] += s.n_orders[i];
        }
    }

    std::vector<std::int64_t> mid_sum;
    std::vector<__int128> mid_sq;
    std::vector<double> rbar_sum, rbar_sq;
    std::vector<std::int64_t> spread, gap_bid, gap_ask, n_orders;
};

// Mean and standard error from first and second moments.
void moments(double sum, double sq, double n, double& mean, double& se) {
    mean = sum / n;
    if (n < 2) {
        se = 0.0;
        return;
    }
    const double var = std::max(0.0, (sq - n * mean * mean) / (n - 1));
    se = std::sqrt(var / n);
}

} // namespace

std::uint64_t replacement_seed(std::uint64_t seed, std::uint64_t attempt) noexcept {
    return Rng::mix(seed + attempt * 0x9e3779b97f4a7c15ULL);
}

ExecutionResult run_ensemble(const ModelParams& params, const NmziParams& nmzi, const MetaorderSpec& spec,
                             const ExecutionOptions& options, std::int64_t n_sims, std::uint64_t base_seed,
                             std::size_t workers) {
    if (n_sims < 1) throw InvalidConfiguration("ensemble needs at least one simulation");
    spec.validate();
    params.validate();
    nmzi.validate();
    if (workers == 0) workers = worker_count();

    ExecutionResult r;
    r.spec = spec;
    r.params = params;
    r.nmzi = nmzi;
    r.options = options;
    r.base_seed = base_seed;
    r.n_sims = n_sims;
    r.post_window = spec.resolved_post_window(nmzi);

    const auto n = static_cast<double>(n_sims);
    const auto length = static_cast<std::size_t>(spec.pre_window + spec.duration() + r.post_window + 2);
    Accumulator acc(length, options.book_paths);
    const auto i0 = static_cast<std::size_t>(spec.pre_window);
    const auto i_end = static_cast<std::size_t>(spec.pre_window + spec.duration() + 1);

    // Bounded memory: a chunk of simulations runs in parallel, then is
    // reduced in index order.
    const auto total = static_cast<std::size_t>(n_sims);
    const std::size_t chunk = std::max<std::size_t>(1, 2 * workers);
    std::vector<SingleExecution> slots(chunk);
    std::vector<std::vector<std::uint64_t>> exhausted(chunk);
    // Every simulation's sequence of attempts is fixed by its seed, so whether
    // the budget is exceeded does not depend on the worker count.
    const auto budget = static_cast<std::int64_t>(std::floor(options.max_replaced_fraction * n));
    std::atomic<std::int64_t> replaced{0};
    for (std::size_t begin = 0; begin < total; begin += chunk) {
        const std::size_t count = std::min(chunk, total - begin);
        parallel_for(count, workers, [&](std::size_t k) {
            const std::uint64_t seed = Rng::for_stream(base_seed, begin + k).seed();
            exhausted[k].clear();
            for (std::uint64_t attempt = 0;; ++attempt) {
                const std::uint64_t s = attempt == 0 ? seed : replacement_seed(seed, attempt);
                try {
                    slots[k] = execute_metaorder(params, nmzi, spec, options, s);
                    return;
                } catch (const LiquidityExhausted& e) {
                    if (!options.replace_exhausted) throw;
                    if (replaced.fetch_add(1) + 1 > budget) {
                        throw LiquidityExhausted("more than " + std::to_string(budget) + " of " +
                                                 std::to_string(n_sims) +
                                                 " simulations emptied a book side; last: " + e.what());
                    }
                    exhausted[k].push_back(s);
                }
            }
        });
        for (std::size_t k = 0; k < count; ++k) {
            r.exhausted_seeds.insert(r.exhausted_seeds.end(), exhausted[k].begin(), exhausted[k].end());
            SingleExecution& s = slots[k];
            acc.add(s);
            r.seeds.push_back(s.seed);
            r.peak_impact.push_back(spec.sign() * 0.5 * static_cast<double>(s.mid[i_end] - s.mid[i0]));
            r.market_orders_during.push_back(s.market_orders_during);
            r.truncated += s.truncated;
            r.placed += s.placed;
            if (options.keep_paths) r.mid_paths.push_back(std::move(s.mid));
            if (options.keep_rbar_paths) r.rbar_paths.push_back(std::move(s.rbar));
            s = SingleExecution{};
        }
    }

    r.mean_mid.resize(length);
    r.se_mid.resize(length);
    r.mean_rbar.resize(length);
    r.se_rbar.resize(length);
    for (std::size_t i = 0; i < length; ++i) {
        // Half-ticks to ticks.
        moments(0.5 * static_cast<double>(acc.mid_sum[i]), 0.25 * static_cast<double>(acc.mid_sq[i]), n,
                r.mean_mid[i], r.se_mid[i]);
        moments(acc.rbar_sum[i], acc.rbar_sq[i], n, r.mean_rbar[i], r.se_rbar[i]);
    }
    if (options.book_paths) {
        auto mean_of = [&](const std::vector<std::int64_t>& v) {
            std::vector<double> m(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) m[i] = static_cast<double>(v[i]) / n;
            return m;
        };
        r.mean_spread = mean_of(acc.spread);
        r.mean_gap_bid = mean_of(acc.gap_bid);
        r.mean_gap_ask = mean_of(acc.gap_ask);
        r.mean_n_orders = mean_of(acc.n_orders);
    }
    return r;
}

} // namespace nmzi
