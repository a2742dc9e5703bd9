#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "nmzi/errors.hpp"
#include "nmzi/io.hpp"

using namespace nmzi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("nmzi_test_io_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("fmt round-trips doubles") {
    for (double v : {0.0, 1.0, -2.5, 0.1, 1e-300, 12.909876543210123, 1.0 / 3.0}) {
        CHECK(std::stod(fmt(v)) == v);
    }
    CHECK(fmt(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(fmt(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("configuration round-trips through JSON") {
    ExperimentConfig c;
    c.model.lambda = 0.02;
    c.model.levels = 120;
    c.alpha = 3e-3;
    c.beta2 = 0.05;
    c.beta1 = 1e-4;
    c.metaorder.volume = 77;
    c.metaorder.interval = 33;
    c.metaorder.side = Side::Sell;
    c.trend_clock = TrendClock::Children;
    c.sims = 9;
    c.seed = 123456789012345ULL;
    c.per_sim_columns = false;
    c.analysis.decay = false;
    c.grid.beta2 = {0.5};
    c.me_snapshots = {0, 7};
    const Json j = to_json(c);
    const ExperimentConfig d = config_from_json(j);
    CHECK(to_json(d) == j);
    CHECK(d.beta1.value() == 1e-4);
    CHECK(d.nmzi().beta1 == 1e-4);
    CHECK(d.metaorder.side == Side::Sell);
    CHECK(d.trend_clock == TrendClock::Children);
    CHECK(d.seed == c.seed);

    Json bad = j;
    bad["metaorder"]["side"] = "sideways";
    CHECK_THROWS_AS(config_from_json(bad), InvalidConfiguration);
    bad = j;
    bad["sims"] = "many";
    CHECK_THROWS_AS(config_from_json(bad), InvalidConfiguration);
}

TEST_CASE("beta1 defaults to beta2 over the child spacing") {
    ExperimentConfig c;
    c.beta2 = 0.021;
    c.metaorder.interval = 20;
    CHECK(c.nmzi().beta1 == doctest::Approx(0.001));
    CHECK(trend_clock_from_string(to_string(TrendClock::Events)) == TrendClock::Events);
    CHECK_THROWS_AS(trend_clock_from_string("weekly"), InvalidConfiguration);
}

TEST_CASE("estimated parameters load back as model parameters") {
    const fs::path dir = scratch("params");
    EstimatedParams e;
    e.lambda = 0.011;
    e.mu = 0.04;
    e.delta = 0.12;
    e.q0 = 100.6;
    write_json(dir / "params.json", to_json(e, 250));
    const ModelParams p = load_params(dir / "params.json");
    CHECK(p.lambda == 0.011);
    CHECK(p.q0 == 101);
    CHECK(p.levels == 250);
    CHECK_THROWS_AS(read_json(dir / "missing.json"), InvalidConfiguration);
    fs::remove_all(dir);
}

TEST_CASE("execution outputs read back") {
    const fs::path dir = scratch("exec");
    const ModelParams params;
    MetaorderSpec spec;
    spec.volume = 4;
    spec.interval = 5;
    spec.pre_window = 10;
    spec.post_window = 15;
    ExecutionOptions o;
    o.warmup = 200;
    o.keep_paths = true;
    const ExecutionResult r = run_ensemble(params, NmziParams{0.01, 1e-3}, spec, o, 3, 11, 1);
    write_execution(dir, r, true);
    const MeanPaths m = read_mean_paths(dir / "paths.csv");
    REQUIRE(m.t.size() == r.length());
    CHECK(m.t.front() == -10);
    for (std::size_t i = 0; i < m.t.size(); ++i) {
        CHECK(m.mid[i] == r.mean_mid[i]);
        CHECK(m.rbar[i] == r.mean_rbar[i]);
    }
    std::ifstream in(dir / "paths.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header.find("mid_seed_13") != std::string::npos);
    const Json s = read_json(dir / "summary.json");
    CHECK(s["n_sims"] == 3);
    CHECK(s["peak_impact"].size() == 3);
    CHECK(fs::exists(dir / "children.csv"));
    fs::remove_all(dir);
}
