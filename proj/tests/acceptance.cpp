// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "genco/bayes.hpp"
#include "genco/curves.hpp"
#include "genco/market.hpp"
#include "genco/offering.hpp"
#include "genco/pipeline.hpp"
#include "genco/synth.hpp"
#include "support/curve_oracle.hpp"
#include "support/market_fixture.hpp"
#include "support/offering_oracle.hpp"

namespace fs = std::filesystem;
using namespace genco;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Every optimum produced by the offering criteria, checked again by criterion 10.
struct Optimum {
    std::string label;
    offering::OfferingSolution solution;
    offering::OfferingProblem problem;
};
std::vector<Optimum> optima;

void keep(std::string label, const offering::OfferingSolution& s, const offering::OfferingProblem& p) {
    optima.push_back({std::move(label), s, p});
}

Outcome discretization_optimality() {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> size(1, 30);
    double worst = 0.0;
    const auto t0 = Clock::now();
    for (int k = 0; k < 200; ++k) {
        const auto n = static_cast<std::size_t>(size(rng));
        const auto curve = curves::build_curve(oracle::random_offers(rng, n));
        const auto groups = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(7, n))(rng);
        const auto milp = curves::discretize(curve, groups);
        const auto dp = curves::discretize_dp_oracle(curve, groups);
        if (!milp.proven_optimal) return {false, fmt::format("curve {} not proven optimal", k)};
        worst = std::max(worst, std::abs(milp.error - dp.error));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-6 && secs < 60.0, fmt::format("max |MILP - DP| = {:.3g}, {:.1f} s", worst, secs)};
}

Outcome identity_discretization() {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> size(1, 30);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const auto n = static_cast<std::size_t>(size(rng));
        const auto curve = curves::build_curve(oracle::random_offers(rng, n));
        worst = std::max({worst, curves::discretize(curve, n).error, curves::discretize_dp_oracle(curve, n).error});
    }
    return {worst == 0.0, fmt::format("max error {:.3g} over 200 curves", worst)};
}

Outcome clearing_correctness() {
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<int> size(1, 60);
    int mismatches = 0;
    for (int k = 0; k < 1000; ++k) {
        const auto curve = curves::build_curve(oracle::random_offers(rng, static_cast<std::size_t>(size(rng))));
        const double demand = std::uniform_real_distribution<double>(0.0, curve.total_quantity())(rng);
        const auto a = market::clear(curve, demand);
        const auto b = market::clear_binary_search(curve, demand);
        if (a.price != b.price || a.marginal_block != b.marginal_block || a.genco_quantity != b.genco_quantity)
            ++mismatches;
    }
    const auto toy = market::clear(curves::build_curve(fixture::market_offers()), 24000.0);
    const bool ok = mismatches == 0 && toy.price == 42.0 && std::abs(toy.dispatched - 24000.0) < 1e-9;
    return {ok, fmt::format("{} mismatches in 1000, fixture price {} at {} MWh", mismatches, toy.price, toy.dispatched)};
}

bayes::RegressionDataset linear_data(std::size_t n, const std::vector<double>& beta, double intercept, double noise,
                                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    bayes::RegressionDataset d;
    const auto p = beta.size();
    for (std::size_t j = 0; j < p; ++j) d.columns.push_back("x" + std::to_string(j));
    d.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    d.y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        double y = intercept;
        for (std::size_t j = 0; j < p; ++j) {
            const double x = 2.0 * j + (1.0 + 0.3 * j) * n01(rng);
            d.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = x;
            y += beta[j] * x;
        }
        d.y(static_cast<Eigen::Index>(r)) = y + noise * n01(rng);
    }
    return d;
}

Outcome gibbs_recovery() {
    const std::vector<double> beta{0.5, -1.0, 2.0, 0.0, 0.3, -0.2, 1.1, 0.05, -3.0, 0.8};
    const auto d = linear_data(2000, beta, 40.0, 1.0, 12);
    const auto t0 = Clock::now();
    const auto a = bayes::fit_gibbs(d);
    const double secs = seconds_since(t0);
    const auto b = bayes::fit_gibbs(d);
    int inside = 0;
    for (std::size_t j = 0; j < beta.size(); ++j) {
        const auto k = static_cast<Eigen::Index>(j) + 1;
        if (std::abs(a.mean(k) - beta[j]) <= 3.0 * a.sd(k)) ++inside;
    }
    const double noise_err = std::abs(a.noise_sd - 1.0);
    const bool same = a.mean == b.mean && a.sd == b.sd && a.retained == b.retained && a.noise_sd == b.noise_sd;
    return {inside >= 9 && noise_err <= 0.1 && same && secs < 30.0,
            fmt::format("{}/10 within 3 sd, noise sd {:.4f}, reproducible {}, {:.1f} s", inside, a.noise_sd, same, secs)};
}

Outcome noiseless_identification() {
    const std::vector<double> beta{1.5, -0.7, 0.0, 3.2, -2.1};
    const auto d = linear_data(500, beta, 12.0, 0.0, 11);
    bayes::GibbsOptions o;
    o.draws = 2000;
    o.burn_in = 500;
    const auto s = bayes::fit_gibbs(d, o);
    double worst = std::abs(s.mean(0) - 12.0);
    for (std::size_t j = 0; j < beta.size(); ++j)
        worst = std::max(worst, std::abs(s.mean(static_cast<Eigen::Index>(j) + 1) - beta[j]));
    return {worst <= 1e-3, fmt::format("max coefficient error {:.3g}", worst)};
}

Outcome milp_oracle_equivalence() {
    std::mt19937_64 rng(606);
    std::uniform_int_distribution<int> two(1, 2), three(1, 3);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        auto p = oracle::random_problem(rng, two(rng), two(rng), three(rng));
        p.chi = (k % 5) / 4.0;
        const auto ref = oracle::solve_offering(p);
        offering::OptimizeOptions o;
        o.gap_tolerance = 0.0;
        o.method = offering::Method::full;
        const auto s = offering::optimize(p, o);
        worst = std::max(worst, std::abs(s.objective - ref.objective));
        keep(fmt::format("oracle instance {}", k), s, p);
    }
    return {worst <= 1e-5, fmt::format("max |MILP - oracle| = {:.3g} over 50 instances", worst)};
}

/// Synthetic market with a fitted posterior, reused by the offering criteria.
struct SyntheticDay {
    app::PreparedMarket market;
    bayes::PosteriorSummary posterior;
    Day day{};
};

const SyntheticDay& synthetic_day() {
    static const SyntheticDay d = [] {
        app::SyntheticMarketSpec spec;
        spec.history_days = 365;
        spec.test_days = 5;
        const auto m = app::generate_synthetic(spec, 7);
        const auto data = app::make_market(m.curves, m.covariates);
        SyntheticDay out;
        out.market = app::prepare(data, 5, 7, app::Discretizer::dp);
        const auto rows = bayes::slice(bayes::build_features(out.market.series, {4}), HourStamp{spec.start},
                                       HourStamp{m.test_start});
        bayes::GibbsOptions g;
        g.draws = 1500;
        g.burn_in = 300;
        out.posterior = bayes::fit_gibbs(rows, g);
        out.day = m.test_start + std::chrono::days{1};
        return out;
    }();
    return d;
}

offering::OfferingProblem day_problem(double flexibility, double chi, int scenarios, std::uint64_t seed = 5) {
    const auto& d = synthetic_day();
    app::PipelineConfig c;
    c.blocks = 5;
    c.flexibility = flexibility;
    c.chi = chi;
    const auto set = scenarios::generate(d.posterior, scenarios, seed);
    return app::day_problem(d.market, d.posterior, set, d.day, c);
}

/// First `hours` hours and `scenarios` scenarios of a problem, small enough for the full model.
offering::OfferingProblem truncate(offering::OfferingProblem p, int hours, int scenarios) {
    auto& f = p.forecast;
    f.hours = hours;
    f.D.resize(static_cast<std::size_t>(hours));
    f.renewable.resize(static_cast<std::size_t>(hours));
    f.quantity.resize(static_cast<std::size_t>(hours));
    f.cost.resize(static_cast<std::size_t>(hours));
    f.flex.resize(static_cast<std::size_t>(hours));
    scenarios::ScenarioSet s;
    s.scenarios = scenarios;
    s.hours = hours;
    s.blocks = p.scenarios.blocks;
    s.seed = p.scenarios.seed;
    s.coefficient.resize(static_cast<std::size_t>(scenarios * hours * s.blocks));
    s.probability.assign(static_cast<std::size_t>(scenarios), 1.0 / scenarios);
    for (int w = 0; w < scenarios; ++w)
        for (int t = 0; t < hours; ++t)
            for (int i = 0; i < s.blocks; ++i) s.beta(w, t, i) = p.scenarios.beta(w, t, i);
    p.scenarios = s;
    return p;
}

Outcome sigma_zero_degeneracy() {
    const auto base = day_problem(0.0, 0.0, 50);
    auto averse = base;
    averse.chi = 1.0;
    const auto a = offering::optimize(base);
    const auto b = offering::optimize(averse);
    keep("sigma 0, chi 0", a, base);
    keep("sigma 0, chi 1", b, averse);
    const bool offers = a.P == b.P;
    const bool profits = a.profit == b.profit && a.expected_profit == b.expected_profit && a.cvar == b.cvar;
    return {offers && profits,
            fmt::format("offers identical {}, E {:.2f} / {:.2f}, CVaR {:.2f} / {:.2f}", offers, a.expected_profit,
                        b.expected_profit, a.cvar, b.cvar)};
}

Outcome flexibility_monotonicity() {
    std::vector<double> neutral, averse;
    for (double sigma : {0.0, 0.05, 0.10, 0.15}) {
        const auto p = day_problem(sigma, 0.0, 50);
        const auto s = offering::optimize(p);
        keep(fmt::format("sigma {}, chi 0", sigma), s, p);
        neutral.push_back(s.objective);
        const auto q = truncate(day_problem(sigma, 0.5, 6), 2, 6);
        offering::OptimizeOptions o;
        o.method = offering::Method::full;
        o.gap_tolerance = 0.0;
        const auto r = offering::optimize(q, o);
        keep(fmt::format("sigma {}, chi 0.5, reduced", sigma), r, q);
        averse.push_back(r.objective);
    }
    bool ok = true;
    for (std::size_t k = 1; k < neutral.size(); ++k)
        ok = ok && neutral[k] >= neutral[k - 1] - 1e-6 && averse[k] >= averse[k - 1] - 1e-6;
    return {ok, fmt::format("day objective {:.2f} {:.2f} {:.2f} {:.2f}; reduced chi 0.5 {:.2f} {:.2f} {:.2f} {:.2f}",
                            neutral[0], neutral[1], neutral[2], neutral[3], averse[0], averse[1], averse[2], averse[3])};
}

Outcome frontier_monotonicity() {
    const auto p = truncate(day_problem(0.15, 0.0, 10), 2, 10);
    offering::OptimizeOptions o;
    o.method = offering::Method::full;
    o.gap_tolerance = 0.0;
    std::vector<double> grid;
    for (int k = 0; k <= 10; ++k) grid.push_back(k / 10.0);
    const auto f = offering::efficient_frontier(p, grid, o);
    bool ok = f.size() == 11;
    for (std::size_t k = 1; ok && k < f.size(); ++k)
        ok = f[k].expected_profit <= f[k - 1].expected_profit + 1e-6 && f[k].cvar >= f[k - 1].cvar - 1e-6;
    for (const auto& pt : f) {
        auto q = p;
        q.chi = pt.solved_chi;
        keep(fmt::format("frontier chi {}", pt.solved_chi), offering::optimize(q, o), q);
    }
    return {ok, fmt::format("E {:.2f} -> {:.2f}, CVaR {:.2f} -> {:.2f}", f.front().expected_profit,
                            f.back().expected_profit, f.front().cvar, f.back().cvar)};
}

Outcome cvar_identity() {
    if (optima.empty()) return {false, "no optima recorded"};
    double worst = 0.0;
    int above = 0;
    for (const auto& o : optima) {
        const auto r = offering::evaluate_solution(o.solution, o.problem);
        worst = std::max(worst, std::abs(r.eta_identity - r.tail_mean));
        if (r.eta_identity > r.expected + 1e-9) ++above;
    }
    return {worst <= 1e-5 && above == 0,
            fmt::format("{} optima, max |identity - tail mean| = {:.3g}, CVaR > E in {}", optima.size(), worst, above)};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / fmt::format("genco-acceptance-{}", name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Outcome end_to_end() {
    const auto dir = scratch("e2e");
    const auto t0 = Clock::now();
    app::write_synthetic(app::generate_synthetic({}, 2019), dir);
    app::PipelineConfig c;
    c.curves = dir / "curves.csv";
    c.covariates = dir / "covariates.csv";
    c.output = dir / "out";
    c.scenarios = 50;
    c.blocks = 5;
    c.test_days = 30;
    c.flexibility = 0.10;
    const auto r = app::run_pipeline(c);
    const double secs = seconds_since(t0);
    const bool ok = secs < 900.0 && r.days.size() == 30 && r.report.profit.mean >= r.report.baseline.mean;
    return {ok, fmt::format("{} days in {:.1f} s, mean profit {:.2f} vs baseline {:.2f}", r.days.size(), secs,
                            r.report.profit.mean, r.report.baseline.mean)};
}

std::vector<std::string> lines_with(const fs::path& file, const std::string& needle) {
    std::ifstream in(file);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);)
        if (line.find(needle) != std::string::npos) out.push_back(line);
    return out;
}

Outcome no_lookahead() {
    app::SyntheticMarketSpec spec;
    spec.history_days = 365;
    spec.test_days = 6;
    const auto m = app::generate_synthetic(spec, 31);
    const Day day = m.test_start + std::chrono::days{2};
    const HourStamp cutoff{day + std::chrono::days{1}};

    auto mutated = m;
    for (auto& b : mutated.curves)
        if (b.hour >= cutoff) {
            b.price = b.price * 1.7 + 3.0;
            b.quantity *= 1.05;
        }
    for (auto& c : mutated.covariates)
        if (c.hour >= cutoff) {
            c.demand_forecast *= 0.97;
            c.wind_forecast *= 0.3;
            c.holiday = !c.holiday;
            c.realized_price += 25.0;
        }

    auto run = [&](const app::SyntheticMarket& market, const std::string& name) {
        const auto dir = scratch(name);
        app::write_synthetic(market, dir);
        app::PipelineConfig c;
        c.curves = dir / "curves.csv";
        c.covariates = dir / "covariates.csv";
        c.output = dir / "out";
        c.scenarios = 20;
        c.blocks = 5;
        c.draws = 1500;
        c.burn_in = 300;
        c.train_start = format_day(spec.start);
        c.train_end = format_day(m.test_start - std::chrono::days{1});
        c.test_start = format_day(m.test_start);
        c.test_end = format_day(m.test_start + std::chrono::days{spec.test_days - 1});
        app::run_pipeline(c);
        return c.output;
    };
    const auto a = run(m, "original");
    const auto b = run(mutated, "mutated");
    const auto key = format_day(day);
    int compared = 0;
    bool same = true;
    for (const char* file : {"offers.csv", "backtest_days.csv", "backtest_hours.csv", "day_summary.csv", "profits.csv"}) {
        const auto x = lines_with(a / file, key);
        const auto y = lines_with(b / file, key);
        same = same && !x.empty() && x == y;
        compared += static_cast<int>(x.size());
    }
    const auto later = format_day(day + std::chrono::days{1});
    const bool changed = lines_with(a / "backtest_hours.csv", later) != lines_with(b / "backtest_hours.csv", later);
    return {same && changed, fmt::format("{} rows of day {} identical {}, later days changed {}", compared, key, same, changed)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"discretization optimality", discretization_optimality},
        {"identity discretization", identity_discretization},
        {"clearing correctness", clearing_correctness},
        {"gibbs recovery", gibbs_recovery},
        {"noiseless identification", noiseless_identification},
        {"stochastic MILP oracle equivalence", milp_oracle_equivalence},
        {"zero flexibility degeneracy", sigma_zero_degeneracy},
        {"flexibility monotonicity", flexibility_monotonicity},
        {"frontier monotonicity", frontier_monotonicity},
        {"CVaR identity", cvar_identity},
        {"end to end", end_to_end},
        {"no lookahead", no_lookahead},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
