// nmzi: estimation, simulation, metaorder ensembles, analysis, master
// equations and parameter sweeps from the command line.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nmzi/analysis.hpp"
#include "nmzi/errors.hpp"
#include "nmzi/estimation.hpp"
#include "nmzi/execution.hpp"
#include "nmzi/experiments.hpp"
#include "nmzi/io.hpp"
#include "nmzi/master_eq.hpp"
#include "nmzi/model.hpp"

namespace fs = std::filesystem;
using namespace nmzi;

namespace {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kBadConfig = 2,
    kBadInput = 3,
    kDegenerate = 4,
};

// Command-line values that override the config file when given.
struct Overrides {
    std::string config;
    std::optional<std::string> params_file;
    std::optional<double> lambda, mu, delta_rate;
    std::optional<int> q0, levels;
    std::optional<double> alpha, beta2, beta1;
    std::optional<std::int64_t> interval, volume, pre_window, post_window;
    std::optional<std::string> side, trend_clock;
    std::optional<std::int64_t> sims, warmup, iterations;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool no_per_sim = false;
    bool replace_exhausted = false;
    std::optional<double> max_replaced_fraction;
    bool no_stationary = false, no_components = false, no_decay = false;
    std::optional<double> half_life;
    std::vector<double> grid_beta2, grid_alpha;
    std::vector<std::int64_t> grid_interval, grid_volume;
    std::optional<std::int64_t> me_steps, me_initial_spread;
    std::optional<double> me_n_orders, me_gap_bid, me_gap_ask, me_p_sell;
    std::vector<std::int64_t> me_snapshots;
};

void add_model_options(CLI::App* c, Overrides& o) {
    c->add_option("--config", o.config, "JSON config file (flags override it)");
    c->add_option("--params", o.params_file, "estimated-parameters file");
    c->add_option("--lambda", o.lambda, "limit-order rate per level");
    c->add_option("--mu", o.mu, "market-order rate per side");
    c->add_option("--cancel-rate", o.delta_rate, "cancellation rate per order");
    c->add_option("--q0", o.q0, "shares per unit order");
    c->add_option("--levels,-K", o.levels, "grid size K");
    c->add_option("--alpha", o.alpha, "trend reaction (0 = ZI)");
    c->add_option("--beta2", o.beta2, "inverse memory per child interval; beta1 = beta2 / (delta + 1)");
    c->add_option("--beta1", o.beta1, "inverse memory per event (overrides --beta2)");
    c->add_option("--seed", o.seed, "base seed");
    c->add_option("--warmup", o.warmup, "events discarded before recording");
    c->add_option("--out", o.out, "output directory");
}

void add_metaorder_options(CLI::App* c, Overrides& o) {
    c->add_option("--delta", o.interval, "trading interval: background events between children");
    c->add_option("--volume,--Q", o.volume, "metaorder volume Q in unit orders");
    c->add_option("--side", o.side, "buy or sell")->check(CLI::IsMember({"buy", "sell"}));
    c->add_option("--pre-window", o.pre_window, "events recorded before the start");
    c->add_option("--post-window", o.post_window, "events recorded after the last child (< 0: 4 / beta1)");
    c->add_option("--trend-clock", o.trend_clock, "events or children")->check(CLI::IsMember({"events", "children"}));
    c->add_option("--sims", o.sims, "ensemble size");
    c->add_flag("--replace-exhausted", o.replace_exhausted,
                "rerun a simulation that empties a book side with a fresh seed (reported)");
    c->add_option("--max-replaced", o.max_replaced_fraction, "largest fraction of simulations that may be rerun")
        ->check(CLI::Range(0.0, 1.0));
}

void add_analysis_options(CLI::App* c, Overrides& o) {
    c->add_flag("--no-stationary", o.no_stationary, "skip the stationary-regime fit");
    c->add_flag("--no-components", o.no_components, "skip the impact components");
    c->add_flag("--no-decay", o.no_decay, "skip the post-execution fits");
    c->add_option("--half-life", o.half_life, "EWMA smoothing half-life of the components, in children");
}

template <class T>
void apply(const std::optional<T>& v, T& dst) {
    if (v) dst = *v;
}

ExperimentConfig resolve(const Overrides& o) {
    ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    apply(o.params_file, c.params_file);
    if (!c.params_file.empty()) {
        const int levels = c.model.levels;
        c.model = load_params(c.params_file);
        if (!read_json(c.params_file).contains("K")) c.model.levels = levels;
    }
    apply(o.lambda, c.model.lambda);
    apply(o.mu, c.model.mu);
    apply(o.delta_rate, c.model.delta);
    apply(o.q0, c.model.q0);
    apply(o.levels, c.model.levels);
    apply(o.alpha, c.alpha);
    apply(o.beta2, c.beta2);
    if (o.beta1) c.beta1 = *o.beta1;
    else if (o.beta2) c.beta1.reset();
    apply(o.interval, c.metaorder.interval);
    apply(o.volume, c.metaorder.volume);
    apply(o.pre_window, c.metaorder.pre_window);
    apply(o.post_window, c.metaorder.post_window);
    if (o.side) c.metaorder.side = *o.side == "buy" ? Side::Buy : Side::Sell;
    if (o.trend_clock) c.trend_clock = trend_clock_from_string(*o.trend_clock);
    apply(o.sims, c.sims);
    apply(o.seed, c.seed);
    apply(o.warmup, c.warmup);
    apply(o.iterations, c.iterations);
    apply(o.out, c.out);
    if (o.no_per_sim) c.per_sim_columns = false;
    if (o.replace_exhausted) c.replace_exhausted = true;
    apply(o.max_replaced_fraction, c.max_replaced_fraction);
    if (o.no_stationary) c.analysis.stationary = false;
    if (o.no_components) c.analysis.components = false;
    if (o.no_decay) c.analysis.decay = false;
    apply(o.half_life, c.analysis.smoothing_half_life);
    if (!o.grid_beta2.empty()) c.grid.beta2 = o.grid_beta2;
    if (!o.grid_alpha.empty()) c.grid.alpha = o.grid_alpha;
    if (!o.grid_interval.empty()) c.grid.interval = o.grid_interval;
    if (!o.grid_volume.empty()) c.grid.volume = o.grid_volume;
    apply(o.me_steps, c.me_steps);
    apply(o.me_initial_spread, c.me_initial_spread);
    apply(o.me_n_orders, c.me_n_orders);
    apply(o.me_gap_bid, c.me_gap_bid);
    apply(o.me_gap_ask, c.me_gap_ask);
    apply(o.me_p_sell, c.me_p_sell);
    if (!o.me_snapshots.empty()) c.me_snapshots = o.me_snapshots;

    c.model.validate();
    c.nmzi().validate();
    c.metaorder.validate();
    if (c.sims < 1) throw InvalidConfiguration("sims must be >= 1");
    if (c.warmup < 0 || c.iterations < 0) throw InvalidConfiguration("warmup and iterations must be >= 0");
    return c;
}

fs::path prepare_out(const ExperimentConfig& c) {
    const fs::path out(c.out);
    fs::create_directories(out);
    write_json(out / "config.resolved.json", to_json(c));
    return out;
}

// ---- estimate --------------------------------------------------------------

struct EstimateArgs {
    std::string message, orderbook, out = "out";
    double tick_size = 0.01;
    int levels = kDefaultLevels;
    std::size_t tau_max = 0;
};

int cmd_estimate(const EstimateArgs& a) {
    const fs::path out(a.out);
    fs::create_directories(out);
    write_json(out / "config.resolved.json", Json{{"command", "estimate"},
                                                  {"message", a.message},
                                                  {"orderbook", a.orderbook},
                                                  {"tick_size", a.tick_size},
                                                  {"K", a.levels},
                                                  {"tau_max", a.tau_max}});
    const LobsterData data = parse_lobster(a.message, a.orderbook);
    const CleanedStream cleaned = preprocess(data);
    write_json(out / "cleaning_report.json", to_json(cleaned.report));
    const EstimatedParams p = estimate_params(cleaned, a.tick_size);
    write_json(out / "params.json", to_json(p, a.levels));
    std::cout << "lambda=" << fmt(p.lambda) << " mu=" << fmt(p.mu) << " delta=" << fmt(p.delta)
              << " q0=" << fmt(p.q0) << " (" << cleaned.report.output << " events kept of " << cleaned.report.input
              << ")\n";
    if (a.tau_max > 0) {
        const ResponseCurve r = empirical_response(cleaned, a.tau_max, a.tick_size);
        std::ostringstream o;
        o << "tau,response,se\n";
        for (std::size_t i = 0; i < r.mean.size(); ++i) o << i + 1 << ',' << fmt(r.mean[i]) << ',' << fmt(r.se[i]) << '\n';
        write_text(out / "response.csv", o.str());
    }
    return kOk;
}

// ---- simulate --------------------------------------------------------------

int cmd_simulate(const ExperimentConfig& c, std::size_t tau_max) {
    const fs::path out = prepare_out(c);
    const SimTrajectory tr = run(c.model, c.nmzi(), c.warmup, c.iterations, c.seed);
    write_trajectory_csv(out / "trajectory.csv", tr.rows);
    Json s = to_json(tr.summary);
    s["equilibrium_spread"] = equilibrium_spread(c.model);
    s["theoretical_k"] = theoretical_k(tr.summary.mean_gap, tr.summary.p_qbest_one);
    write_json(out / "summary.json", s);
    if (tau_max > 0) {
        const std::vector<SimTrajectory> one{tr};
        const ResponseCurve r = simulated_response(one, tau_max);
        std::ostringstream o;
        o << "tau,response,se\n";
        for (std::size_t i = 0; i < r.mean.size(); ++i) o << i + 1 << ',' << fmt(r.mean[i]) << ',' << fmt(r.se[i]) << '\n';
        write_text(out / "response.csv", o.str());
    }
    std::cout << "events=" << tr.summary.events << " mean_spread=" << fmt(tr.summary.mean_spread) << '\n';
    return kOk;
}

// ---- metaorder / analyze -----------------------------------------------------

void write_analysis(const fs::path& out, const ExecutionAnalysis& a) {
    write_json(out / "analysis.json", to_json(a));
    if (a.components) write_components_csv(out / "components.csv", *a.components);
}

bool any_analysis(const AnalysisOptions& a) { return a.stationary || a.components || a.decay; }

int cmd_metaorder(const ExperimentConfig& c, bool book_paths) {
    const fs::path out = prepare_out(c);
    ExecutionOptions eo;
    eo.warmup = c.warmup;
    eo.keep_paths = c.per_sim_columns;
    eo.book_paths = book_paths;
    eo.trend_clock = c.trend_clock;
    eo.replace_exhausted = c.replace_exhausted;
    eo.max_replaced_fraction = c.max_replaced_fraction;
    const ExecutionResult r = run_ensemble(c.model, c.nmzi(), c.metaorder, eo, c.sims, c.seed);
    write_execution(out, r, c.per_sim_columns);
    if (any_analysis(c.analysis)) write_analysis(out, analyze_execution(r, c.analysis));
    std::cout << "peak_impact=" << fmt(r.mean_peak_impact())
              << " participation=" << fmt(r.mean_participation_rate()) << "%\n";
    return kOk;
}

// Rebuilds the ensemble means of a metaorder run from its output directory.
ExecutionResult load_execution(const fs::path& run_dir, const ExperimentConfig& c) {
    const Json summary = read_json(run_dir / "summary.json");
    const MeanPaths m = read_mean_paths(run_dir / "paths.csv");
    ExecutionResult r;
    r.spec = c.metaorder;
    r.params = c.model;
    r.nmzi = c.nmzi();
    r.n_sims = summary.at("n_sims").get<std::int64_t>();
    r.post_window = summary.at("post_window").get<std::int64_t>();
    r.mean_mid = m.mid;
    r.se_mid = m.mid_se;
    r.mean_rbar = m.rbar;
    r.se_rbar = m.rbar_se;
    const auto expected = static_cast<std::size_t>(r.spec.pre_window + r.spec.duration() + r.post_window + 2);
    if (m.t.empty() || m.t.front() != -r.spec.pre_window || r.length() != expected) {
        throw InvalidConfiguration(run_dir.string() + ": paths.csv does not match config.resolved.json");
    }
    return r;
}

int cmd_analyze(const std::string& run_dir, const Overrides& o) {
    Overrides inherited = o;
    inherited.config = (fs::path(run_dir) / "config.resolved.json").string();
    if (!o.out) inherited.out = run_dir;
    const ExperimentConfig c = resolve(inherited);
    const ExecutionResult r = load_execution(run_dir, c);
    const fs::path out(c.out);
    fs::create_directories(out);
    if (fs::weakly_canonical(out) != fs::weakly_canonical(run_dir)) write_json(out / "config.resolved.json", to_json(c));
    const ExecutionAnalysis a = analyze_execution(r, c.analysis);
    write_analysis(out, a);
    if (a.stationary) {
        std::cout << "rbar_star=" << fmt(a.stationary->rbar_star) << " r_star=" << fmt(a.stationary->r_star) << '\n';
    }
    if (a.decay) std::cout << "reversion_fraction=" << fmt(a.decay->reversion_fraction) << '\n';
    return kOk;
}

// ---- master-eq ---------------------------------------------------------------

int cmd_master_eq(ExperimentConfig c) {
    if (c.me_n_orders <= 0 || c.me_gap_bid <= 0 || c.me_gap_ask <= 0) {
        // Book statistics from a no-execution run.
        RunOptions ro;
        ro.keep_rows = false;
        const SimTrajectory tr = run(c.model, c.nmzi(), c.warmup, c.iterations, c.seed, ro);
        if (c.me_n_orders <= 0) c.me_n_orders = tr.summary.mean_n_orders;
        if (c.me_gap_bid <= 0) c.me_gap_bid = tr.summary.mean_gap_bid;
        if (c.me_gap_ask <= 0) c.me_gap_ask = tr.summary.mean_gap_ask;
    }
    const fs::path out = prepare_out(c);
    MasterEqContext ctx = MasterEqContext::from_params(c.model, c.me_n_orders, c.me_gap_bid, c.me_gap_ask, c.me_p_sell);
    const Evolution spread =
        evolve(spread_point(c.me_initial_spread, c.model.levels), ctx, c.me_steps, Quantity::Spread, c.me_snapshots);
    ctx.spread_path = spread.mean;
    const Evolution mid =
        evolve(midprice_point(0, c.model.levels), ctx, c.me_steps, Quantity::Midprice, c.me_snapshots);
    write_evolution_csv(out / "spread_mean.csv", spread);
    write_snapshots_csv(out / "spread_snapshots.csv", spread);
    write_evolution_csv(out / "mid_mean.csv", mid);
    write_snapshots_csv(out / "mid_snapshots.csv", mid);
    auto stats = [](const MasterEqStats& s) {
        return Json{{"clipped", s.clipped}, {"max_leak", s.max_leak}, {"lost_mass", s.lost_mass}};
    };
    write_json(out / "master_eq.json", Json{{"gamma", ctx.gamma},
                                            {"n_orders", c.me_n_orders},
                                            {"gap_bid", ctx.gap_bid},
                                            {"gap_ask", ctx.gap_ask},
                                            {"p_sell", ctx.p_sell},
                                            {"equilibrium_spread", equilibrium_spread(c.model)},
                                            {"spread_final_mean", spread.final.mean()},
                                            {"mid_final_mean", mid.final.mean()},
                                            {"spread_stats", stats(spread.stats)},
                                            {"mid_stats", stats(mid.stats)}});
    std::cout << "spread " << fmt(spread.mean.front()) << " -> " << fmt(spread.mean.back()) << ", mid drift "
              << fmt(mid.mean.back()) << " ticks\n";
    return kOk;
}

// ---- sweep -------------------------------------------------------------------

int cmd_sweep(const ExperimentConfig& c) {
    const fs::path out = prepare_out(c);
    SweepSettings s;
    s.params = c.model;
    s.grid = c.grid;
    s.sims = c.sims;
    s.seed = c.seed;
    s.warmup = c.warmup;
    s.pre_window = c.metaorder.pre_window;
    s.post_window = c.metaorder.post_window;
    s.trend_clock = c.trend_clock;
    s.replace_exhausted = c.replace_exhausted;
    s.max_replaced_fraction = c.max_replaced_fraction;
    s.analysis = c.analysis;
    std::vector<SweepCell> cells;
    Json all = Json::array();
    for (double b2 : s.grid.beta2) {
        for (double a : s.grid.alpha) {
            for (std::int64_t d : s.grid.interval) {
                for (std::int64_t q : s.grid.volume) {
                    cells.push_back(run_sweep_cell(s, b2, a, d, q));
                    const SweepCell& cell = cells.back();
                    Json j{{"beta2", b2},
                           {"alpha", a},
                           {"delta", d},
                           {"Q", q},
                           {"beta1", cell.beta1},
                           {"peak_impact", cell.peak_impact},
                           {"participation_rate", cell.participation},
                           {"replaced_simulations", cell.replaced}};
                    if (cell.error.empty()) j["analysis"] = to_json(cell.analysis);
                    else j["error"] = cell.error;
                    all.push_back(std::move(j));
                    std::cerr << "cell " << cells.size() << '/' << s.grid.size() << " beta2=" << fmt(b2)
                              << " alpha=" << fmt(a) << " delta=" << d << " Q=" << q << '\n';
                }
            }
        }
    }
    write_sweep_csv(out / "sweep.csv", cells);
    write_json(out / "sweep.json", all);
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zero Intelligence / trend-reacting order book simulator and metaorder toolkit"};
    app.require_subcommand(1);
    Overrides o;

    EstimateArgs ea;
    auto* est = app.add_subcommand("estimate", "estimate model rates from LOBSTER message/orderbook files");
    est->add_option("--message", ea.message, "LOBSTER message file")->required();
    est->add_option("--orderbook", ea.orderbook, "LOBSTER orderbook file")->required();
    est->add_option("--tick-size", ea.tick_size, "tick size in dollars")->check(CLI::PositiveNumber);
    est->add_option("--levels,-K", ea.levels, "grid size written to the params file");
    est->add_option("--response", ea.tau_max, "also write the response function up to this lag");
    est->add_option("--out", ea.out, "output directory");

    std::size_t sim_tau = 0;
    auto* sim = app.add_subcommand("simulate", "single trajectory without execution");
    add_model_options(sim, o);
    sim->add_option("--iterations", o.iterations, "recorded events");
    sim->add_option("--delta", o.interval, "trading interval used to convert --beta2");
    sim->add_option("--response", sim_tau, "also write the response function up to this lag");

    bool book_paths = false;
    auto* meta = app.add_subcommand("metaorder", "metaorder ensemble: paths, children, summary and fits");
    add_model_options(meta, o);
    add_metaorder_options(meta, o);
    add_analysis_options(meta, o);
    meta->add_flag("--no-per-sim", o.no_per_sim, "omit the per-simulation columns of paths.csv");
    meta->add_flag("--book-paths", book_paths, "also record mean spread, gaps and book size");

    std::string run_dir;
    auto* ana = app.add_subcommand("analyze", "re-run the fits on a metaorder output directory");
    ana->add_option("--run", run_dir, "metaorder output directory")->required()->check(CLI::ExistingDirectory);
    ana->add_option("--out", o.out, "output directory (default: the run directory)");
    add_analysis_options(ana, o);

    auto* me = app.add_subcommand("master-eq", "spread and mid-price master equations between two children");
    add_model_options(me, o);
    me->add_option("--delta", o.interval, "trading interval used to convert --beta2");
    me->add_option("--steps", o.me_steps, "events to evolve");
    me->add_option("--initial-spread", o.me_initial_spread, "initial spread, ticks");
    me->add_option("--n-orders", o.me_n_orders, "frozen book size (default: from a no-execution run)");
    me->add_option("--gap-bid", o.me_gap_bid, "frozen bid first gap, ticks");
    me->add_option("--gap-ask", o.me_gap_ask, "frozen ask first gap, ticks");
    me->add_option("--p-sell", o.me_p_sell, "sell limit-order probability")->check(CLI::Range(0.0, 1.0));
    me->add_option("--snapshots", o.me_snapshots, "steps with full distribution snapshots");
    me->add_option("--iterations", o.iterations, "events of the no-execution run for book statistics");

    auto* sw = app.add_subcommand("sweep", "metaorder ensembles over a (beta2, alpha, delta, Q) grid");
    add_model_options(sw, o);
    add_metaorder_options(sw, o);
    add_analysis_options(sw, o);
    sw->add_option("--grid-beta2", o.grid_beta2, "beta2 values");
    sw->add_option("--grid-alpha", o.grid_alpha, "alpha values");
    sw->add_option("--grid-delta", o.grid_interval, "trading intervals");
    sw->add_option("--grid-volume", o.grid_volume, "metaorder volumes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kBadConfig;
    }

    try {
        if (*est) return cmd_estimate(ea);
        if (*ana) return cmd_analyze(run_dir, o);
        const ExperimentConfig c = resolve(o);
        if (*sim) return cmd_simulate(c, sim_tau);
        if (*meta) return cmd_metaorder(c, book_paths);
        if (*me) return cmd_master_eq(c);
        if (*sw) return cmd_sweep(c);
    } catch (const InvalidConfiguration& e) {
        std::cerr << "nmzi: invalid configuration: " << e.what() << '\n';
        return kBadConfig;
    } catch (const ParseError& e) {
        std::cerr << "nmzi: " << e.what() << '\n';
        return kBadInput;
    } catch (const EstimationDegenerate& e) {
        std::cerr << "nmzi: estimation degenerate: " << e.what() << '\n';
        return kDegenerate;
    } catch (const std::exception& e) {
        std::cerr << "nmzi: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}
