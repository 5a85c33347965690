#pragma once

#include <utility>
#include <vector>

#include "genco/offering.hpp"

namespace genco::offering::detail {

inline constexpr double kTie = 1e-7;

/// Profit weights of a (sub)model: sum_w weight_w * profit_w, plus
/// risk * (eta - (1/alpha) sum pi s) when `with_cvar`, where
/// s_w >= eta - profit_w - offset_w.
struct Objective {
    std::vector<double> weight;
    double risk = 0.0;
    bool with_cvar = false;
    std::vector<double> offset;
};

/// Variable ids. Hour-major, then scenario, then block.
struct Layout {
    std::vector<int> hours;
    std::vector<int> P;
    std::vector<int> lambda;
    std::vector<int> u;
    std::vector<int> z;
    std::vector<int> Q;
    std::vector<int> s;
    int eta = -1;
};

double base_price(const OfferingProblem& p, int t);
/// Range of the scenario price over the offer box, clipped to [floor, cap].
std::pair<double, double> price_range(const OfferingProblem& p, int t, int w);

milp::ModelSpec build_model(const OfferingProblem& p, const std::vector<int>& hours, const Objective& obj, Layout& L);

/// Dispatch rule: strictly cheaper offers run, dearer ones do not, a tie
/// runs when it is profitable.
bool dispatch(double P, double lambda, double cost);
double hour_profit(const OfferingProblem& p, int t, int w, const double* P);
double optimal_eta(const std::vector<double>& values, const std::vector<double>& prob, double alpha);

/// Model values implied by full-day offers `P` (used as a starting point).
std::vector<double> start_values(const OfferingProblem& p, const Layout& L, const std::vector<double>& P,
                                 const Objective& obj, const milp::ModelSpec& model);

}  // namespace genco::offering::detail
