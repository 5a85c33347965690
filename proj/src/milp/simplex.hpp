#pragma once

// Dense bounded-variable primal simplex (two phases, artificial start basis).
// Internal to the MILP solver; problems reach it after node presolve, so they are
// small and every variable has finite bounds.

#include <vector>

#include "genco/milp.hpp"

namespace genco::milp::detail {

struct LpRow {
    std::vector<Term> terms;
    Cmp cmp = Cmp::le;
    double rhs = 0.0;
};

struct LpProblem {
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<double> cost;  ///< minimized
    std::vector<LpRow> rows;
};

enum class LpStatus { optimal, infeasible, iteration_limit };

struct LpOutcome {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> x;
    double objective = 0.0;
    long iterations = 0;
};

LpOutcome solve_lp(const LpProblem& problem);

}  // namespace genco::milp::detail
