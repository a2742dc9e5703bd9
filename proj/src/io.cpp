#include "nmzi/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nmzi/errors.hpp"

namespace nmzi {

namespace fs = std::filesystem;

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

NmziParams ExperimentConfig::nmzi() const {
    if (beta1) return NmziParams{alpha, *beta1};
    return NmziParams::from_beta2(alpha, beta2, static_cast<long>(metaorder.interval));
}

std::string_view to_string(TrendClock c) noexcept { return c == TrendClock::Events ? "events" : "children"; }

TrendClock trend_clock_from_string(std::string_view s) {
    if (s == "events") return TrendClock::Events;
    if (s == "children") return TrendClock::Children;
    throw InvalidConfiguration("trend clock must be 'events' or 'children'");
}

Json to_json(const ModelParams& p) {
    return Json{{"lambda", p.lambda}, {"mu", p.mu}, {"delta", p.delta}, {"q0", p.q0}, {"K", p.levels}};
}

namespace {

ModelParams model_from_json(const Json& j, ModelParams p) {
    p.lambda = j.value("lambda", p.lambda);
    p.mu = j.value("mu", p.mu);
    p.delta = j.value("delta", p.delta);
    p.q0 = j.value("q0", p.q0);
    p.levels = j.value("K", p.levels);
    return p;
}

template <class T>
void get_if(const Json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

} // namespace

Json to_json(const ExperimentConfig& c) {
    Json j;
    j["model"] = to_json(c.model);
    j["params_file"] = c.params_file;
    j["nmzi"] = Json{{"alpha", c.alpha}, {"beta2", c.beta2}};
    if (c.beta1) j["nmzi"]["beta1"] = *c.beta1;
    j["nmzi"]["beta1_resolved"] = c.nmzi().beta1;
    j["metaorder"] = Json{{"volume", c.metaorder.volume},
                          {"interval", c.metaorder.interval},
                          {"side", std::string(to_string(c.metaorder.side))},
                          {"pre_window", c.metaorder.pre_window},
                          {"post_window", c.metaorder.post_window},
                          {"trend_clock", std::string(to_string(c.trend_clock))},
                          {"replace_exhausted", c.replace_exhausted},
                          {"max_replaced_fraction", c.max_replaced_fraction}};
    j["sims"] = c.sims;
    j["seed"] = c.seed;
    j["warmup"] = c.warmup;
    j["iterations"] = c.iterations;
    j["out"] = c.out;
    j["per_sim_columns"] = c.per_sim_columns;
    j["analysis"] = Json{{"stationary", c.analysis.stationary},
                         {"components", c.analysis.components},
                         {"decay", c.analysis.decay},
                         {"smoothing_half_life", c.analysis.smoothing_half_life},
                         {"min_linear_points", c.analysis.min_linear_points}};
    j["grid"] = Json{{"beta2", c.grid.beta2}, {"alpha", c.grid.alpha}, {"interval", c.grid.interval},
                     {"volume", c.grid.volume}};
    j["master_eq"] = Json{{"steps", c.me_steps},       {"initial_spread", c.me_initial_spread},
                          {"n_orders", c.me_n_orders}, {"gap_bid", c.me_gap_bid},
                          {"gap_ask", c.me_gap_ask},   {"p_sell", c.me_p_sell},
                          {"snapshots", c.me_snapshots}};
    return j;
}

ExperimentConfig config_from_json(const Json& j) {
    ExperimentConfig c;
    try {
        if (j.contains("model")) c.model = model_from_json(j.at("model"), c.model);
        get_if(j, "params_file", c.params_file);
        if (j.contains("nmzi")) {
            const Json& n = j.at("nmzi");
            get_if(n, "alpha", c.alpha);
            get_if(n, "beta2", c.beta2);
            if (n.contains("beta1")) c.beta1 = n.at("beta1").get<double>();
        }
        if (j.contains("metaorder")) {
            const Json& m = j.at("metaorder");
            get_if(m, "volume", c.metaorder.volume);
            get_if(m, "interval", c.metaorder.interval);
            get_if(m, "pre_window", c.metaorder.pre_window);
            get_if(m, "post_window", c.metaorder.post_window);
            get_if(m, "replace_exhausted", c.replace_exhausted);
            get_if(m, "max_replaced_fraction", c.max_replaced_fraction);
            if (m.contains("trend_clock")) c.trend_clock = trend_clock_from_string(m.at("trend_clock").get<std::string>());
            if (m.contains("side")) {
                const auto s = m.at("side").get<std::string>();
                if (s != "buy" && s != "sell") throw InvalidConfiguration("metaorder side must be buy or sell");
                c.metaorder.side = s == "buy" ? Side::Buy : Side::Sell;
            }
        }
        get_if(j, "sims", c.sims);
        get_if(j, "seed", c.seed);
        get_if(j, "warmup", c.warmup);
        get_if(j, "iterations", c.iterations);
        get_if(j, "out", c.out);
        get_if(j, "per_sim_columns", c.per_sim_columns);
        if (j.contains("analysis")) {
            const Json& a = j.at("analysis");
            get_if(a, "stationary", c.analysis.stationary);
            get_if(a, "components", c.analysis.components);
            get_if(a, "decay", c.analysis.decay);
            get_if(a, "smoothing_half_life", c.analysis.smoothing_half_life);
            get_if(a, "min_linear_points", c.analysis.min_linear_points);
        }
        if (j.contains("grid")) {
            const Json& g = j.at("grid");
            get_if(g, "beta2", c.grid.beta2);
            get_if(g, "alpha", c.grid.alpha);
            get_if(g, "interval", c.grid.interval);
            get_if(g, "volume", c.grid.volume);
        }
        if (j.contains("master_eq")) {
            const Json& m = j.at("master_eq");
            get_if(m, "steps", c.me_steps);
            get_if(m, "initial_spread", c.me_initial_spread);
            get_if(m, "n_orders", c.me_n_orders);
            get_if(m, "gap_bid", c.me_gap_bid);
            get_if(m, "gap_ask", c.me_gap_ask);
            get_if(m, "p_sell", c.me_p_sell);
            get_if(m, "snapshots", c.me_snapshots);
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfiguration(std::string("config: ") + e.what());
    }
    return c;
}

ExperimentConfig load_config(const fs::path& path) { return config_from_json(read_json(path)); }

Json to_json(const EstimatedParams& p, int levels) {
    const auto& d = p.diagnostics;
    Json j{{"lambda", p.lambda}, {"mu", p.mu},   {"delta", p.delta},
           {"q0", p.q0},         {"K", levels}, {"tick_size", p.tick_size}};
    j["diagnostics"] = Json{{"N", d.n},
                            {"N_LO", d.n_limit},
                            {"N_MO", d.n_market},
                            {"N_C", d.n_cancel},
                            {"spread_before_limit_orders", d.spread_before_limit},
                            {"mean_floor_half_spread", d.half_spread_floor_mean},
                            {"n_ls", d.levels_in_play},
                            {"q_best_bid", d.q_best_bid},
                            {"q_best_ask", d.q_best_ask},
                            {"degenerate", p.degenerate}};
    return j;
}

Json to_json(const CleaningReport& r) {
    return Json{{"input", r.input},     {"halted", r.halted}, {"auctions", r.auctions},
                {"crossed", r.crossed}, {"grouped", r.grouped}, {"hidden", r.hidden},
                {"outside_hours", r.outside_hours}, {"output", r.output}};
}

ModelParams load_params(const fs::path& path) {
    const Json j = read_json(path);
    ModelParams p = model_from_json(j, ModelParams{});
    // Estimated q0 is a mean size; the model works in whole shares.
    if (j.contains("q0") && j.at("q0").is_number_float()) p.q0 = static_cast<int>(std::lround(j.at("q0").get<double>()));
    p.validate();
    return p;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidConfiguration("cannot write " + path.string());
    f << text;
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

Json read_json(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw InvalidConfiguration("cannot open " + path.string());
    try {
        return Json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what(), 0);
    }
}

void write_trajectory_csv(const fs::path& path, const std::vector<TrajectoryRow>& rows) {
    std::ostringstream o;
    o << "t,type,side,price,mid,spread,gap_bid,gap_ask,n_bid,n_ask,rbar,p_sell\n";
    for (const auto& r : rows) {
        o << r.t << ',' << to_string(r.kind) << ',' << to_string(r.side) << ',' << r.price << ','
          << fmt(0.5 * static_cast<double>(r.mid)) << ',' << r.spread << ',' << r.gap_bid << ',' << r.gap_ask << ','
          << r.n_bid << ',' << r.n_ask << ',' << fmt(r.rbar) << ',' << fmt(r.p_sell) << '\n';
    }
    write_text(path, o.str());
}

Json to_json(const RunSummary& s) {
    return Json{{"events", s.events},
                {"limit_orders", s.limit_orders},
                {"market_orders", s.market_orders},
                {"cancellations", s.cancellations},
                {"mean_spread", s.mean_spread},
                {"mean_gap_bid", s.mean_gap_bid},
                {"mean_gap_ask", s.mean_gap_ask},
                {"mean_gap", s.mean_gap},
                {"p_qbest_one", s.p_qbest_one},
                {"mean_n_orders", s.mean_n_orders},
                {"mean_gamma", s.mean_gamma},
                {"frac_limit", s.frac_limit},
                {"frac_market", s.frac_market},
                {"frac_cancel", s.frac_cancel},
                {"truncated", s.truncated},
                {"placed", s.placed}};
}

void write_execution(const fs::path& dir, const ExecutionResult& r, bool per_sim_columns) {
    fs::create_directories(dir);
    const bool per_sim = per_sim_columns && !r.mid_paths.empty();
    const bool book = !r.mean_spread.empty();
    {
        std::ofstream o(dir / "paths.csv", std::ios::binary);
        if (!o) throw InvalidConfiguration("cannot write " + (dir / "paths.csv").string());
        o << "t,mid_mean,mid_se,rbar_mean,rbar_se";
        if (book) o << ",spread_mean,gap_bid_mean,gap_ask_mean,n_orders_mean";
        if (per_sim) {
            for (auto s : r.seeds) o << ",mid_seed_" << s;
        }
        o << '\n';
        for (std::size_t i = 0; i < r.length(); ++i) {
            o << r.first_event() + static_cast<std::int64_t>(i) << ',' << fmt(r.mean_mid[i]) << ',' << fmt(r.se_mid[i])
              << ',' << fmt(r.mean_rbar[i]) << ',' << fmt(r.se_rbar[i]);
            if (book) {
                o << ',' << fmt(r.mean_spread[i]) << ',' << fmt(r.mean_gap_bid[i]) << ',' << fmt(r.mean_gap_ask[i])
                  << ',' << fmt(r.mean_n_orders[i]);
            }
            if (per_sim) {
                for (const auto& p : r.mid_paths) o << ',' << fmt(0.5 * static_cast<double>(p[i]));
            }
            o << '\n';
        }
    }
    {
        std::ostringstream o;
        o << "j,t_j,mid_pre,mid_pre_se,mid_post,mid_post_se,rbar_post\n";
        for (std::int64_t j = 1; j <= r.spec.volume; ++j) {
            const std::int64_t t = r.spec.child_time(j);
            const std::size_t pre = r.index_of(t), post = r.index_of(t + 1);
            o << j << ',' << t << ',' << fmt(r.mean_mid[pre]) << ',' << fmt(r.se_mid[pre]) << ','
              << fmt(r.mean_mid[post]) << ',' << fmt(r.se_mid[post]) << ',' << fmt(r.mean_rbar[post]) << '\n';
        }
        write_text(dir / "children.csv", o.str());
    }
    Json s;
    s["n_sims"] = r.n_sims;
    s["base_seed"] = r.base_seed;
    s["seeds"] = r.seeds;
    s["volume"] = r.spec.volume;
    s["interval"] = r.spec.interval;
    s["side"] = std::string(to_string(r.spec.side));
    s["beta1"] = r.nmzi.beta1;
    s["beta2"] = r.nmzi.beta2(r.spec.interval);
    s["alpha"] = r.nmzi.alpha;
    s["duration"] = r.spec.duration();
    s["pre_window"] = r.spec.pre_window;
    s["post_window"] = r.post_window;
    s["mid_before_execution"] = r.mid_at(0);
    s["peak_impact_mean"] = r.mean_peak_impact();
    s["peak_impact"] = r.peak_impact;
    s["participation_rate_mean"] = r.mean_participation_rate();
    std::vector<double> rates;
    for (auto n : r.market_orders_during) rates.push_back(participation_rate(r.spec.volume, n));
    s["participation_rate"] = rates;
    s["impact_curve"] = r.impact_curve();
    s["truncated_orders"] = r.truncated;
    s["placed_orders"] = r.placed;
    s["exhausted_seeds"] = r.exhausted_seeds;
    write_json(dir / "summary.json", s);
}

MeanPaths read_mean_paths(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open " + path.string(), 0);
    std::string line;
    if (!std::getline(f, line) || line.rfind("t,mid_mean,mid_se,rbar_mean,rbar_se", 0) != 0) {
        throw ParseError(path.string() + ": unexpected header", 1);
    }
    MeanPaths m;
    long n = 1;
    auto num = [&](std::string_view s) {
        double v = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) throw ParseError("malformed number '" + std::string(s) + "'", n);
        return v;
    };
    while (std::getline(f, line)) {
        ++n;
        if (line.empty()) continue;
        std::string_view rest(line);
        std::string_view cols[5];
        for (auto& c : cols) {
            const auto comma = rest.find(',');
            c = rest.substr(0, comma);
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        }
        m.t.push_back(static_cast<std::int64_t>(num(cols[0])));
        m.mid.push_back(num(cols[1]));
        m.mid_se.push_back(num(cols[2]));
        m.rbar.push_back(num(cols[3]));
        m.rbar_se.push_back(num(cols[4]));
    }
    return m;
}

namespace {

Json to_json(const ExpFit& f) {
    return Json{{"a", f.a},         {"b", f.b},         {"c", f.c},
                {"sigma_a", f.sigma_a}, {"sigma_b", f.sigma_b}, {"sigma_c", f.sigma_c},
                {"residual_norm", f.residual_norm}, {"points", f.n}};
}

Json to_json(const StationaryReport& s) {
    return Json{{"fit", to_json(s.fit)},
                {"rbar_star", s.rbar_star},
                {"rbar_star_se", s.rbar_star_se},
                {"tau_star", s.tau_star},
                {"t_star", s.t_star},
                {"r_star", s.r_star},
                {"r_star_se", s.r_star_se},
                {"linear_points", s.linear_points},
                {"stationary_reached", s.stationary_reached},
                {"predicted_r_star", s.predicted_r_star},
                {"proportionality_deviation", s.proportionality_deviation}};
}

Json to_json(const DecayFit& d) {
    return Json{{"a", d.a},
                {"sigma_a", d.sigma_a},
                {"b", d.b},
                {"sigma_b", d.sigma_b},
                {"abar", d.abar},
                {"sigma_abar", d.sigma_abar},
                {"btilde", d.btilde},
                {"sigma_btilde", d.sigma_btilde},
                {"c", d.c},
                {"sigma_c", d.sigma_c},
                {"gamma", d.gamma},
                {"abar_predicted", d.abar_predicted},
                {"c_predicted", d.c_predicted},
                {"rate_deviation", d.rate_deviation},
                {"abar_deviation", d.abar_deviation},
                {"m_pre", d.m_pre},
                {"m_end", d.m_end},
                {"peak_impact", d.peak_impact},
                {"permanent_impact", d.permanent_impact},
                {"reversion_fraction", d.reversion_fraction},
                {"half_life", d.half_life},
                {"points", d.points}};
}

} // namespace

Json to_json(const ExecutionAnalysis& a) {
    Json j;
    j["beta2"] = a.beta2;
    j["equivalence_deviation"] = a.equivalence_deviation;
    j["stationary"] = a.stationary ? to_json(*a.stationary) : Json{{"error", a.stationary_error}};
    j["stationary_description_ii"] = a.stationary_ii ? to_json(*a.stationary_ii) : Json{{"error", a.stationary_ii_error}};
    j["decay"] = a.decay ? to_json(*a.decay) : Json{{"error", a.decay_error}};
    if (a.components) {
        j["components"] = Json{{"smoothing_half_life", a.components->half_life},
                               {"kernel_fit", a.components->kernel_fit},
                               {"warning", a.components->warning}};
    }
    return j;
}

void write_components_csv(const fs::path& path, const ImpactSeries& s) {
    std::ostringstream o;
    o << "j,eta,rho,immediate,reversion,net,immediate_direct,reversion_direct,immediate_smooth,reversion_smooth,"
         "net_smooth\n";
    for (std::size_t k = 0; k < s.eta.size(); ++k) {
        o << k + 1 << ',' << fmt(s.eta[k]) << ',' << fmt(s.rho[k]) << ',' << fmt(s.immediate[k]) << ','
          << fmt(s.reversion[k]) << ',' << fmt(s.net[k]) << ',' << fmt(s.immediate_direct[k]) << ','
          << fmt(s.reversion_direct[k]) << ',' << fmt(s.immediate_smooth[k]) << ',' << fmt(s.reversion_smooth[k])
          << ',' << fmt(s.net_smooth[k]) << '\n';
    }
    write_text(path, o.str());
}

void write_sweep_csv(const fs::path& path, const std::vector<SweepCell>& cells) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    std::ostringstream o;
    o << "beta2,alpha,delta,Q,beta1,rbar_star,rbar_star_se,r_star,r_star_se,tau_star,t_star,predicted_r_star,"
         "proportionality_deviation,rbar_star_ii,equivalence_deviation,neg_abar_over_btilde,half_life,"
         "reversion_fraction,peak_impact,participation_rate,replaced_simulations,status\n";
    for (const auto& c : cells) {
        const auto& a = c.analysis;
        const StationaryReport* s = a.stationary ? &*a.stationary : nullptr;
        const DecayFit* d = a.decay ? &*a.decay : nullptr;
        std::string status = "ok";
        if (!c.error.empty()) status = "simulation failed: " + c.error;
        else if (!s) status = "stationary fit failed: " + a.stationary_error;
        else if (!d && !a.decay_error.empty()) status = "decay fit failed: " + a.decay_error;
        for (char& ch : status) {
            if (ch == ',' || ch == '\n') ch = ';';
        }
        o << fmt(c.beta2) << ',' << fmt(c.alpha) << ',' << c.interval << ',' << c.volume << ',' << fmt(c.beta1) << ','
          << fmt(s ? s->rbar_star : nan) << ',' << fmt(s ? s->rbar_star_se : nan) << ','
          << fmt(s ? s->r_star : nan) << ',' << fmt(s ? s->r_star_se : nan) << ',' << fmt(s ? s->tau_star : nan)
          << ',' << fmt(s ? s->t_star : nan) << ',' << fmt(s ? s->predicted_r_star : nan) << ','
          << fmt(s ? s->proportionality_deviation : nan) << ','
          << fmt(a.stationary_ii ? a.stationary_ii->rbar_star : nan) << ',' << fmt(a.equivalence_deviation) << ','
          << fmt(d ? -d->abar / d->btilde : nan) << ',' << fmt(d ? d->half_life : nan) << ','
          << fmt(d ? d->reversion_fraction : nan) << ',' << fmt(c.peak_impact) << ',' << fmt(c.participation) << ','
          << c.replaced << ',' << status << '\n';
    }
    write_text(path, o.str());
}

void write_evolution_csv(const fs::path& path, const Evolution& ev) {
    std::ostringstream o;
    o << "step,mean\n";
    for (std::size_t k = 0; k < ev.mean.size(); ++k) o << k << ',' << fmt(ev.mean[k]) << '\n';
    write_text(path, o.str());
}

void write_snapshots_csv(const fs::path& path, const Evolution& ev) {
    std::ostringstream o;
    o << "step,value,probability\n";
    for (std::size_t s = 0; s < ev.snapshots.size(); ++s) {
        const Distribution& d = ev.snapshots[s];
        for (std::size_t i = 0; i < d.probs.size(); ++i) {
            if (d.probs[i] == 0.0) continue;
            o << ev.snapshot_steps[s] << ',' << fmt(d.unit * static_cast<double>(d.origin + static_cast<std::int64_t>(i)))
              << ',' << fmt(d.probs[i]) << '\n';
        }
    }
    write_text(path, o.str());
}

} // namespace nmzi
