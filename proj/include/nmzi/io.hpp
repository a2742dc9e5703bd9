#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nmzi/estimation.hpp"
#include "nmzi/execution.hpp"
#include "nmzi/experiments.hpp"
#include "nmzi/master_eq.hpp"
#include "nmzi/model.hpp"

namespace nmzi {

using Json = nlohmann::ordered_json;

// Everything a CLI run needs; written back as config.resolved.json next to
// the outputs so the run can be repeated from that file alone.
struct ExperimentConfig {
    ModelParams model;
    std::string params_file;          // estimated-parameters file; overrides `model` when set
    double alpha = 0.0;
    double beta2 = 1e-3;              // beta1 = beta2 / (interval + 1)
    std::optional<double> beta1;      // explicit override
    MetaorderSpec metaorder;
    TrendClock trend_clock = TrendClock::Events;
    bool replace_exhausted = false;   // see ExecutionOptions
    double max_replaced_fraction = 0.05;
    std::int64_t sims = 200;
    std::uint64_t seed = 1;
    std::int64_t warmup = 20000;
    std::int64_t iterations = 100000; // simulate
    std::string out = "out";
    bool per_sim_columns = true;      // metaorder: one paths.csv column per simulation
    AnalysisOptions analysis;
    SweepGrid grid;
    // master-eq
    std::int64_t me_steps = 20;
    std::int64_t me_initial_spread = 28;
    double me_n_orders = 0;           // <= 0: take from a no-execution run
    double me_gap_bid = 0;            // <= 0: take from a no-execution run
    double me_gap_ask = 0;
    double me_p_sell = 0.5;
    std::vector<std::int64_t> me_snapshots{0, 1, 5, 10, 20};

    NmziParams nmzi() const;
};

std::string_view to_string(TrendClock c) noexcept;
TrendClock trend_clock_from_string(std::string_view s);

Json to_json(const ModelParams& p);
Json to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// Estimated parameters file: lambda, mu, delta, q0, K, tick_size plus a
// diagnostics block.
Json to_json(const EstimatedParams& p, int levels);
Json to_json(const CleaningReport& r);
ModelParams load_params(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

// Shortest text that reads back to the same double.
std::string fmt(double v);

void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TrajectoryRow>& rows);
Json to_json(const RunSummary& s);

// paths.csv, children.csv and summary.json.
void write_execution(const std::filesystem::path& dir, const ExecutionResult& r, bool per_sim_columns);

// Mean columns of a paths.csv written by write_execution.
struct MeanPaths {
    std::vector<std::int64_t> t;
    std::vector<double> mid, mid_se, rbar, rbar_se;
};
MeanPaths read_mean_paths(const std::filesystem::path& path);

Json to_json(const ExecutionAnalysis& a);
void write_components_csv(const std::filesystem::path& path, const ImpactSeries& s);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepCell>& cells);
void write_evolution_csv(const std::filesystem::path& path, const Evolution& ev);
void write_snapshots_csv(const std::filesystem::path& path, const Evolution& ev);

} // namespace nmzi
