#pragma once

// Mixed-integer linear models and an exact branch-and-bound solver.
//
// A ModelSpec holds bounded variables (continuous or binary), linear rows and
// a linear objective. `solve` runs best-bound branch-and-bound over a dense
// bounded-variable simplex, with bound propagation and big-M coefficient
// tightening at every node.

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "genco/error.hpp"

namespace genco::milp {

enum class VarKind { continuous, binary };
enum class Cmp { le, eq, ge };
enum class Sense { minimize, maximize };

struct Variable {
    double lower = 0.0;
    double upper = 0.0;
    VarKind kind = VarKind::continuous;
    std::string name;
};

struct Term {
    int var = 0;
    double coef = 0.0;
};

struct Constraint {
    std::vector<Term> terms;
    Cmp cmp = Cmp::le;
    double rhs = 0.0;
    std::string name;
};

class ModelSpec {
public:
    /// Adds a variable with finite bounds. Binary variables must use [0,1].
    int add_variable(double lower, double upper, VarKind kind = VarKind::continuous,
                     std::string name = {});
    int add_binary(std::string name = {}) { return add_variable(0.0, 1.0, VarKind::binary, std::move(name)); }

    void add_constraint(std::vector<Term> terms, Cmp cmp, double rhs, std::string name = {});
    void set_objective(std::vector<Term> terms, Sense sense);

    /// Narrows the bounds of an existing variable (used to fix binaries).
    void set_bounds(int var, double lower, double upper);

    std::size_t num_variables() const noexcept { return vars_.size(); }
    std::size_t num_constraints() const noexcept { return rows_.size(); }
    std::size_t num_binaries() const noexcept;

    const std::vector<Variable>& variables() const noexcept { return vars_; }
    const std::vector<Constraint>& constraints() const noexcept { return rows_; }
    const std::vector<Term>& objective() const noexcept { return objective_; }
    Sense sense() const noexcept { return sense_; }

    double evaluate_objective(std::span<const double> x) const;

    /// Largest violation of any bound, row or integrality requirement.
    double max_violation(std::span<const double> x) const;

private:
    void check_terms(const std::vector<Term>& terms) const;

    std::vector<Variable> vars_;
    std::vector<Constraint> rows_;
    std::vector<Term> objective_;
    Sense sense_ = Sense::minimize;
};

enum class Status { optimal, infeasible, gap_limit, time_limit };

std::string_view to_string(Status s) noexcept;

struct SolveOptions {
    double gap_tolerance = 1e-6;         ///< relative
    double time_limit_seconds = 1800.0;
    double feasibility_tolerance = 1e-6;
    std::int64_t node_limit = 5'000'000; ///< exceeding it reports gap_limit
    /// Optional feasible starting point; ignored when it violates the model.
    std::optional<std::vector<double>> initial_solution;
};

struct MilpSolution {
    Status status = Status::infeasible;
    std::vector<double> values;  ///< empty when no feasible point was found
    double objective = 0.0;
    double best_bound = 0.0;
    double gap = 0.0;            ///< relative, 0 when proven optimal
    std::int64_t nodes = 0;

    bool has_solution() const noexcept { return !values.empty(); }
};

MilpSolution solve(const ModelSpec& model, const SolveOptions& options = {});

struct RelaxationResult {
    bool feasible = false;
    std::vector<double> values;
    double objective = 0.0;
};

/// LP relaxation (integrality dropped) over the declared bounds.
RelaxationResult solve_relaxation(const ModelSpec& model);

/// CPLEX-style LP text for cross-checking with external solvers.
std::string to_lp_format(const ModelSpec& model);
ModelSpec parse_lp_format(std::string_view text);

}  // namespace genco::milp
