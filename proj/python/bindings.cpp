// Python bindings: parameters, simulation, metaorder ensembles, analysis,
// master equations and estimation. Structured results come back as dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "nmzi/analysis.hpp"
#include "nmzi/errors.hpp"
#include "nmzi/estimation.hpp"
#include "nmzi/execution.hpp"
#include "nmzi/experiments.hpp"
#include "nmzi/io.hpp"
#include "nmzi/master_eq.hpp"
#include "nmzi/model.hpp"

namespace py = pybind11;
using namespace nmzi;

namespace {

py::object to_python(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Side side_from(const std::string& s) {
    if (s == "buy") return Side::Buy;
    if (s == "sell") return Side::Sell;
    throw InvalidConfiguration("side must be 'buy' or 'sell', got '" + s + "'");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Zero Intelligence / Non-Markovian Zero Intelligence order book simulator";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidConfiguration>(m, "InvalidConfiguration", error.ptr());
    py::register_exception<RejectedOrder>(m, "RejectedOrder", error.ptr());
    py::register_exception<LiquidityExhausted>(m, "LiquidityExhausted", error.ptr());
    py::register_exception<InternalConsistency>(m, "InternalConsistency", error.ptr());
    py::register_exception<ParseError>(m, "ParseError", error.ptr());
    py::register_exception<EstimationDegenerate>(m, "EstimationDegenerate", error.ptr());
    py::register_exception<FitFailed>(m, "FitFailed", error.ptr());
    py::register_exception<NumericInstability>(m, "NumericInstability", error.ptr());

    m.attr("DEFAULT_LEVELS") = kDefaultLevels;

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init([](double lambda, double mu, double delta, int q0, int levels) {
                 ModelParams p{lambda, mu, delta, q0, levels};
                 p.validate();
                 return p;
             }),
             py::arg("lambda_") = 0.0131, py::arg("mu") = 0.0441, py::arg("delta") = 0.1174, py::arg("q0") = 101,
             py::arg("levels") = kDefaultLevels)
        .def_readwrite("lambda_", &ModelParams::lambda)
        .def_readwrite("mu", &ModelParams::mu)
        .def_readwrite("delta", &ModelParams::delta)
        .def_readwrite("q0", &ModelParams::q0)
        .def_readwrite("levels", &ModelParams::levels)
        .def("validate", &ModelParams::validate)
        .def("to_dict", [](const ModelParams& p) { return to_python(to_json(p)); })
        .def("__repr__", [](const ModelParams& p) { return "ModelParams(" + to_json(p).dump() + ")"; });

    py::class_<NmziParams>(m, "NmziParams")
        .def(py::init([](double alpha, double beta1) {
                 NmziParams n{alpha, beta1};
                 n.validate();
                 return n;
             }),
             py::arg("alpha") = 0.0, py::arg("beta1") = 1e-3)
        .def_static("from_beta2", &NmziParams::from_beta2, py::arg("alpha"), py::arg("beta2"), py::arg("interval"))
        .def_readwrite("alpha", &NmziParams::alpha)
        .def_readwrite("beta1", &NmziParams::beta1)
        .def("beta2", &NmziParams::beta2, py::arg("interval"))
        .def("__repr__", [](const NmziParams& n) {
            return "NmziParams(alpha=" + fmt(n.alpha) + ", beta1=" + fmt(n.beta1) + ")";
        });

    m.def("sell_lo_probability", &sell_lo_probability, py::arg("alpha"), py::arg("rbar"));
    m.def("theoretical_k", &theoretical_k, py::arg("mean_first_gap"), py::arg("p_qbest_one"));
    m.def("equilibrium_spread", py::overload_cast<const ModelParams&>(&equilibrium_spread), py::arg("params"));

    m.def(
        "simulate",
        [](const ModelParams& params, const NmziParams& nmzi, std::int64_t iterations, std::int64_t warmup,
           std::uint64_t seed, bool spreads) {
            SimTrajectory tr;
            {
                py::gil_scoped_release release;
                tr = run(params, nmzi, warmup, iterations, seed, RunOptions{false, spreads});
            }
            py::dict out;
            out["mids"] = tr.mids;
            out["mo_times"] = tr.mo_times;
            out["mo_signs"] = tr.mo_signs;
            out["spreads"] = tr.spreads;
            out["summary"] = to_python(to_json(tr.summary));
            return out;
        },
        py::arg("params") = ModelParams{}, py::arg("nmzi") = NmziParams{}, py::arg("iterations") = 100000,
        py::arg("warmup") = 20000, py::arg("seed") = 1, py::arg("spreads") = false,
        "One run. Mids are in half-ticks: entry t is the mid before recorded event t.");

    py::class_<ExecutionResult>(m, "ExecutionResult")
        .def_readonly("n_sims", &ExecutionResult::n_sims)
        .def_readonly("post_window", &ExecutionResult::post_window)
        .def_readonly("mean_mid", &ExecutionResult::mean_mid)
        .def_readonly("se_mid", &ExecutionResult::se_mid)
        .def_readonly("mean_rbar", &ExecutionResult::mean_rbar)
        .def_readonly("se_rbar", &ExecutionResult::se_rbar)
        .def_readonly("peak_impact", &ExecutionResult::peak_impact)
        .def_readonly("seeds", &ExecutionResult::seeds)
        .def_readonly("exhausted_seeds", &ExecutionResult::exhausted_seeds)
        .def_property_readonly("first_event", &ExecutionResult::first_event)
        .def("impact_curve", &ExecutionResult::impact_curve)
        .def("mean_peak_impact", &ExecutionResult::mean_peak_impact)
        .def("mean_participation_rate", &ExecutionResult::mean_participation_rate);

    m.def(
        "run_metaorder",
        [](const ModelParams& params, const NmziParams& nmzi, std::int64_t volume, std::int64_t interval,
           const std::string& side, std::int64_t sims, std::uint64_t seed, std::int64_t pre_window,
           std::int64_t post_window, std::int64_t warmup, const std::string& trend_clock, bool replace_exhausted,
           double max_replaced_fraction, std::size_t workers) {
            MetaorderSpec spec;
            spec.volume = volume;
            spec.interval = interval;
            spec.side = side_from(side);
            spec.pre_window = pre_window;
            spec.post_window = post_window;
            ExecutionOptions o;
            o.warmup = warmup;
            o.trend_clock = trend_clock_from_string(trend_clock);
            o.replace_exhausted = replace_exhausted;
            o.max_replaced_fraction = max_replaced_fraction;
            py::gil_scoped_release release;
            return run_ensemble(params, nmzi, spec, o, sims, seed, workers);
        },
        py::arg("params") = ModelParams{}, py::arg("nmzi") = NmziParams{}, py::arg("volume") = 100,
        py::arg("interval") = 50, py::arg("side") = "buy", py::arg("sims") = 200, py::arg("seed") = 1,
        py::arg("pre_window") = 20000, py::arg("post_window") = -1, py::arg("warmup") = 20000,
        py::arg("trend_clock") = "events", py::arg("replace_exhausted") = false,
        py::arg("max_replaced_fraction") = 0.05, py::arg("workers") = 0,
        "Ensemble of constant-speed metaorder executions.");

    m.def(
        "analyze",
        [](const ExecutionResult& r, bool stationary, bool components, bool decay, double smoothing_half_life) {
            AnalysisOptions o;
            o.stationary = stationary;
            o.components = components;
            o.decay = decay;
            o.smoothing_half_life = smoothing_half_life;
            return to_python(to_json(analyze_execution(r, o)));
        },
        py::arg("result"), py::arg("stationary") = true, py::arg("components") = true, py::arg("decay") = true,
        py::arg("smoothing_half_life") = 50.0);

    m.def(
        "evolve_spread",
        [](const ModelParams& params, std::int64_t initial_spread, std::int64_t steps, double n_orders,
           double gap_bid, double gap_ask) {
            const MasterEqContext ctx = MasterEqContext::from_params(params, n_orders, gap_bid, gap_ask, 0.5);
            py::gil_scoped_release release;
            return evolve(spread_point(initial_spread, params.levels), ctx, steps, Quantity::Spread).mean;
        },
        py::arg("params"), py::arg("initial_spread"), py::arg("steps"), py::arg("n_orders"), py::arg("gap_bid"),
        py::arg("gap_ask"), "Mean spread (ticks) after each step of the spread master equation.");

    m.def(
        "evolve_mid",
        [](const ModelParams& params, std::vector<double> spread_path, std::int64_t steps, double n_orders,
           double gap_bid, double gap_ask, double p_sell) {
            MasterEqContext ctx = MasterEqContext::from_params(params, n_orders, gap_bid, gap_ask, p_sell);
            ctx.spread_path = std::move(spread_path);
            py::gil_scoped_release release;
            return evolve(midprice_point(0, params.levels), ctx, steps, Quantity::Midprice).mean;
        },
        py::arg("params"), py::arg("spread_path"), py::arg("steps"), py::arg("n_orders"), py::arg("gap_bid"),
        py::arg("gap_ask"), py::arg("p_sell"),
        "Mean mid-price change (ticks) after each step of the mid-price master equation.");

    m.def(
        "estimate",
        [](const std::filesystem::path& message, const std::filesystem::path& orderbook, double tick_size,
           int levels) {
            const CleanedStream cleaned = preprocess(parse_lobster(message, orderbook));
            const EstimatedParams e = estimate_params(cleaned, tick_size);
            py::dict out;
            out["params"] = to_python(to_json(e, levels));
            out["cleaning"] = to_python(to_json(cleaned.report));
            return out;
        },
        py::arg("message"), py::arg("orderbook"), py::arg("tick_size") = 0.01, py::arg("levels") = kDefaultLevels,
        "Model rates from a message/orderbook file pair.");
}
