#pragma once

// Bounded dual simplex over a dense tableau, kept alive across
// branch-and-bound nodes so each node starts from the previous basis.
// Structural columns must have finite bounds; every row is written as
// lo <= a.x <= hi with at least one finite side.

#include <span>
#include <utility>
#include <vector>

namespace genco::milp::detail {

struct RangeRow {
    std::vector<std::pair<int, double>> terms;
    double lo = 0.0;
    double hi = 0.0;
};

class DualSimplex {
public:
    enum class Result { optimal, infeasible, cutoff, failed };

    DualSimplex(int num_columns, std::vector<RangeRow> rows, std::vector<double> cost);

    /// Replaces the structural bounds; the basis is kept.
    void set_bounds(std::span<const double> lo, std::span<const double> hi);

    /// Minimises cost.x. Stops early with `cutoff` once the dual objective
    /// reaches `cutoff`.
    Result solve(double cutoff);

    std::vector<double> values() const;
    double objective() const;
    /// Lagrangian bound from the current duals, evaluated on the original
    /// rows; valid whatever the drift in the tableau.
    double dual_bound() const;
    /// Structural reduced costs belonging to `dual_bound`.
    std::vector<double> reduced_costs() const;
    long iterations() const noexcept { return total_iters_; }

private:
    double* trow(int i) { return tab_.data() + static_cast<std::size_t>(i) * ncols_; }
    const double* trow(int i) const { return tab_.data() + static_cast<std::size_t>(i) * ncols_; }
    double value_of(int j) const;
    void slack_basis();
    bool refactor();
    void recompute_beta();
    void place_nonbasic(int j);
    void pivot(int r, int q);
    bool proves_infeasible(int r) const;

    int n_ = 0;
    int m_ = 0;
    int ncols_ = 0;
    std::vector<RangeRow> rows_;
    std::vector<std::vector<std::pair<int, double>>> cols_;  // structural columns
    std::vector<double> cost_;
    std::vector<double> lo_, hi_;  // all columns
    std::vector<double> tab_;
    std::vector<double> beta_;
    std::vector<double> d_;
    std::vector<int> basis_;
    std::vector<int> where_;  // row of a basic column, -1 at lower, -2 at upper
    std::vector<int> nz_;
    int since_refactor_ = 0;
    long total_iters_ = 0;
};

}  // namespace genco::milp::detail
