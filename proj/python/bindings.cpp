#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "genco/curves.hpp"
#include "genco/error.hpp"
#include "genco/market.hpp"
#include "genco/offering.hpp"
#include "genco/pipeline.hpp"
#include "genco/synth.hpp"

namespace py = pybind11;
using namespace genco;

namespace {

curves::SteppedSupplyCurve curve_from(const std::vector<double>& prices, const std::vector<double>& quantities) {
    if (prices.size() != quantities.size()) throw InvalidArgument("prices and quantities differ in length");
    std::vector<curves::OfferBlock> offers;
    for (std::size_t k = 0; k < prices.size(); ++k) offers.push_back({prices[k], quantities[k]});
    return curves::build_curve(std::move(offers));
}

py::dict clear(const std::vector<double>& prices, const std::vector<double>& quantities, double demand) {
    const auto r = market::clear(curve_from(prices, quantities), demand);
    py::dict d;
    d["price"] = r.price;
    d["dispatched"] = r.dispatched;
    d["marginal_block"] = r.marginal_block;
    return d;
}

py::dict discretize(const std::vector<double>& prices, const std::vector<double>& quantities, std::size_t groups,
                    const std::string& method) {
    const auto r = app::discretize_with(curve_from(prices, quantities), groups, app::parse_discretizer(method));
    py::dict d;
    d["prices"] = r.prices;
    d["quantities"] = r.quantities;
    d["group_end"] = r.group_end;
    d["error"] = r.error;
    return d;
}

py::dict optimize(double intercept, double beta_renewable, const std::vector<double>& D,
                  const std::vector<double>& renewable, const std::vector<std::vector<double>>& quantity,
                  const std::vector<std::vector<double>>& cost, const std::vector<std::vector<double>>& flex,
                  const std::vector<std::vector<std::vector<double>>>& coefficients, double chi, double alpha,
                  double big_m, double gap) {
    offering::OfferingProblem p;
    auto& f = p.forecast;
    f.hours = static_cast<int>(D.size());
    f.blocks = quantity.empty() ? 0 : static_cast<int>(quantity.front().size());
    f.intercept = intercept;
    f.beta_renewable = beta_renewable;
    f.D = D;
    f.renewable = renewable;
    f.quantity = quantity;
    f.cost = cost;
    f.flex = flex;
    auto& s = p.scenarios;
    s.scenarios = static_cast<int>(coefficients.size());
    s.hours = f.hours;
    s.blocks = f.blocks;
    s.probability.assign(coefficients.size(), coefficients.empty() ? 0.0 : 1.0 / static_cast<double>(coefficients.size()));
    for (const auto& hours : coefficients) {
        if (hours.size() != static_cast<std::size_t>(f.hours)) throw InvalidArgument("coefficients need one row per hour");
        for (const auto& row : hours) {
            if (row.size() != static_cast<std::size_t>(f.blocks)) throw InvalidArgument("coefficients need one value per block");
            s.coefficient.insert(s.coefficient.end(), row.begin(), row.end());
        }
    }
    p.chi = chi;
    p.alpha = alpha;
    p.big_m = big_m;
    offering::OptimizeOptions o;
    o.gap_tolerance = gap;
    const auto r = offering::optimize(p, o);

    std::vector<std::vector<double>> offers(static_cast<std::size_t>(r.hours));
    for (int t = 0; t < r.hours; ++t)
        for (int i = 0; i < r.blocks; ++i) offers[static_cast<std::size_t>(t)].push_back(r.offer(t, i));
    py::dict d;
    d["offers"] = offers;
    d["profit"] = r.profit;
    d["expected_profit"] = r.expected_profit;
    d["cvar"] = r.cvar;
    d["objective"] = r.objective;
    d["status"] = std::string(milp::to_string(r.status));
    d["gap"] = r.gap;
    d["method"] = r.method;
    return d;
}

std::string synthesize(const std::string& out, std::uint64_t seed, int history_days, int test_days,
                       const std::string& mode) {
    app::SyntheticMarketSpec spec;
    spec.history_days = history_days;
    spec.test_days = test_days;
    if (mode == "linear") spec.mode = app::PriceMode::linear;
    else if (mode != "clearing") throw InvalidArgument("mode must be 'clearing' or 'linear', got '" + mode + "'");
    const auto m = app::generate_synthetic(spec, seed);
    app::write_synthetic(m, out);
    return format_day(m.test_start);
}

py::dict run_pipeline(const std::string& config_json) {
    const auto c = app::parse_config(config_json);
    const auto r = [&] {
        py::gil_scoped_release release;
        return app::run_pipeline(c);
    }();
    py::dict d;
    d["days"] = r.days.size();
    d["predictors"] = r.posterior.predictors();
    d["mae"] = r.metrics.mae;
    d["rmse"] = r.metrics.rmse;
    d["mean_profit"] = r.report.profit.mean;
    d["baseline_mean_profit"] = r.report.baseline.mean;
    d["mean_increment"] = r.report.increment.mean;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Day-ahead offering for a generating company";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<market::ScarcityError>(m, "ScarcityError", PyExc_RuntimeError);

    m.def("clear", &clear, py::arg("prices"), py::arg("quantities"), py::arg("demand"),
          "Uniform marginal price of a supply curve at an inelastic demand.");
    m.def("discretize", &discretize, py::arg("prices"), py::arg("quantities"), py::arg("groups"),
          py::arg("method") = "dp", "Optimal grouping of a supply curve into fewer blocks.");
    m.def("optimize", &optimize, py::arg("intercept"), py::arg("beta_renewable"), py::arg("D"), py::arg("renewable"),
          py::arg("quantity"), py::arg("cost"), py::arg("flex"), py::arg("coefficients"), py::arg("chi") = 0.0,
          py::arg("alpha") = 0.1, py::arg("big_m") = 180.3, py::arg("gap") = 1e-6,
          "Optimal block offers; coefficients are indexed [scenario][hour][block].");
    m.def("worst_tail_mean", &offering::worst_tail_mean, py::arg("values"), py::arg("alpha"));
    m.def("cvar", &offering::cvar, py::arg("values"), py::arg("probabilities"), py::arg("alpha"));
    m.def("synthesize", &synthesize, py::arg("out"), py::arg("seed") = 1, py::arg("history_days") = 365,
          py::arg("test_days") = 30, py::arg("mode") = "clearing",
          "Writes a synthetic market and returns the first test day.");
    m.def("run_pipeline", &run_pipeline, py::arg("config_json"), "Runs the full workflow from a JSON configuration.");
}
