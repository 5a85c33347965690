#pragma once

// Risk-averse day-ahead offering: the producer chooses one price per block
// and hour; each scenario's marginal price follows the learned linear
// response to those prices, blocks priced at or below it are dispatched, and
// the objective mixes expected profit with the CVaR of daily profit.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "genco/milp.hpp"
#include "genco/scenarios.hpp"

namespace genco::offering {

struct OfferingProblem {
    scenarios::ScenarioSet scenarios;
    scenarios::ExogenousForecast forecast;
    double chi = 0.0;           ///< 0 risk-neutral, 1 risk-averse
    double alpha = 0.10;        ///< CVaR tail fraction
    double big_m = 180.3;       ///< price cap, EUR/MWh
    double price_floor = 0.0;   ///< lower bound on the marginal price
    double min_offer = 0.01;    ///< smallest admissible block price

    int hours() const noexcept { return forecast.hours; }
    int blocks() const noexcept { return forecast.blocks; }
    int scenario_count() const noexcept { return scenarios.scenarios; }

    /// Throws InvalidArgument on inconsistent dimensions or parameters.
    void validate() const;
    double lower_price(int t, int i) const;
    double upper_price(int t, int i) const;
    /// Marginal price in scenario w for hour-t offers `P` (one per block).
    double price(int t, int w, const double* P) const;
};

struct OfferingSolution {
    int hours = 0;
    int scenarios = 0;
    int blocks = 0;
    std::vector<double> P;       ///< [hour][block]
    std::vector<char> u;         ///< [hour][scenario][block]
    std::vector<double> Q;       ///< [hour][scenario][block]
    std::vector<double> lambda;  ///< [hour][scenario]
    double eta = 0.0;
    std::vector<double> s;       ///< [scenario]
    std::vector<double> profit;  ///< [scenario], whole day
    double objective = 0.0;
    double expected_profit = 0.0;
    double cvar = 0.0;           ///< eta - (1/alpha) sum pi s
    milp::Status status = milp::Status::optimal;
    double gap = 0.0;            ///< relative, proven
    double upper_bound = 0.0;
    std::string method;

    double offer(int t, int i) const { return P[static_cast<std::size_t>(t) * blocks + i]; }
    bool dispatched(int t, int w, int i) const {
        return u[(static_cast<std::size_t>(t) * scenarios + w) * blocks + i] != 0;
    }
    double price(int t, int w) const { return lambda[static_cast<std::size_t>(t) * scenarios + w]; }
};

/// Full mixed-integer model of one day. Variable names follow
/// `P_t{h}_b{i}`, `u_/z_/Q_t{h}_w{w}_b{i}`, `lambda_t{h}_w{w}`, `eta`, `s_w{w}`.
milp::ModelSpec build_milp(const OfferingProblem& problem);

enum class Method { automatic, full, decomposition };

struct OptimizeOptions {
    double gap_tolerance = 1e-6;
    double time_limit_seconds = 1800.0;
    Method method = Method::automatic;
    /// `automatic` uses the full model up to this many binaries.
    int full_model_binaries = 48;
    int max_passes = 20;             ///< hour-by-hour improvement sweeps
    int bound_iterations = 30;       ///< dual bound refinements
};

/// Optimal offers. Throws Error when the model is infeasible.
OfferingSolution optimize(const OfferingProblem& problem, const OptimizeOptions& options = {});

/// Completes fixed offers `P` ([hour][block]) into a full solution:
/// prices, dispatch (ties go to the more profitable choice), profits and the
/// CVaR auxiliaries at their optimal values.
OfferingSolution complete_offers(const OfferingProblem& problem, std::vector<double> P);

struct ProfitReport {
    std::vector<double> profit;  ///< per scenario, recomputed
    double expected = 0.0;
    double cvar = 0.0;           ///< mean of the worst ceil(alpha * scenarios) profits
    double tail_mean = 0.0;      ///< probability-weighted alpha tail (fractional boundary)
    double eta_identity = 0.0;   ///< eta - (1/alpha) sum pi s, from the solution
    double objective = 0.0;      ///< (1 - chi) expected + chi tail_mean
    double max_violation = 0.0;
};

/// Recomputes profits from prices, dispatch and costs and checks every
/// solution invariant. Throws InvalidArgument with a diagnostic on failure.
ProfitReport evaluate_solution(const OfferingSolution& solution, const OfferingProblem& problem, double tol = 1e-5);

/// Mean of the worst ceil(alpha * n) values.
double worst_tail_mean(std::vector<double> values, double alpha);
/// Rockafellar-Uryasev tail: max over eta of eta - (1/alpha) E[(eta - x)+].
double cvar(const std::vector<double>& values, const std::vector<double>& prob, double alpha);

struct FrontierPoint {
    double chi = 0.0;         ///< requested weight
    double solved_chi = 0.0;  ///< weight actually used (endpoints nudged inwards)
    double expected_profit = 0.0;
    double cvar = 0.0;
    double objective = 0.0;
    milp::Status status = milp::Status::optimal;
};

std::vector<FrontierPoint> efficient_frontier(const OfferingProblem& problem, const std::vector<double>& grid,
                                              const OptimizeOptions& options = {});

/// Per-hour block prices (`hour,block,price`).
void write_offers_csv(std::ostream& out, const OfferingSolution& s);
/// Per-scenario day profits (`scenario,probability,profit`).
void write_profits_csv(std::ostream& out, const OfferingSolution& s, const OfferingProblem& p);
/// One-row summary: expected profit, CVaR, mean price, mean dispatched energy, mean block prices.
void write_summary_csv(std::ostream& out, const OfferingSolution& s, const OfferingProblem& p);

}  // namespace genco::offering
