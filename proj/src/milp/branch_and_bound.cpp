#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <queue>

#include "genco/milp.hpp"
#include "dual_simplex.hpp"
#include "simplex.hpp"

namespace genco::milp {
namespace {

using detail::LpOutcome;
using detail::LpProblem;
using detail::LpRow;
using detail::LpStatus;

constexpr double kIntTol = 1e-6;
constexpr double kFixedTol = 1e-9;
constexpr double kNumericGap = 1e-11;

// Row in `terms <= rhs` form.
struct LeRow {
    std::vector<Term> terms;
    double rhs = 0.0;
};

std::vector<LeRow> normalize_rows(const ModelSpec& model) {
    std::vector<LeRow> out;
    out.reserve(model.num_constraints());
    for (const auto& c : model.constraints()) {
        if (c.cmp != Cmp::ge) out.push_back({c.terms, c.rhs});
        if (c.cmp != Cmp::le) {
            LeRow neg{c.terms, -c.rhs};
            for (auto& t : neg.terms) t.coef = -t.coef;
            out.push_back(std::move(neg));
        }
    }
    return out;
}

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;
};

class Propagator {
public:
    Propagator(const std::vector<LeRow>& rows, const std::vector<Variable>& vars)
        : rows_(rows), vars_(vars), var_rows_(vars.size()) {
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (const auto& t : rows[i].terms) var_rows_[t.var].push_back(static_cast<int>(i));
    }

    /// Tightens `box` to a fixpoint (bounded number of passes). Returns false
    /// when the box is proven empty. `extra` is an optional cutoff row.
    bool run(Box& box, const LeRow* extra) const {
        std::vector<char> active(rows_.size(), 1);
        std::vector<int> changed;
        for (int pass = 0; pass < 25; ++pass) {
            changed.clear();
            for (std::size_t i = 0; i < rows_.size(); ++i)
                if (active[i] && !tighten(rows_[i], box, changed)) return false;
            if (extra && !tighten(*extra, box, changed)) return false;
            if (changed.empty()) break;
            std::fill(active.begin(), active.end(), 0);
            for (int v : changed)
                for (int i : var_rows_[v]) active[i] = 1;
        }
        return true;
    }

private:
    bool tighten(const LeRow& r, Box& box, std::vector<int>& changed) const {
        double minact = 0.0;
        double scale = std::abs(r.rhs);
        for (const auto& t : r.terms) {
            const double v = t.coef > 0.0 ? t.coef * box.lo[t.var] : t.coef * box.hi[t.var];
            minact += v;
            scale = std::max(scale, std::abs(v));
        }
        const double tol = 1e-9 * (1.0 + scale);
        if (minact > r.rhs + tol) return false;
        for (const auto& t : r.terms) {
            const auto j = static_cast<std::size_t>(t.var);
            if (box.hi[j] - box.lo[j] <= kFixedTol) continue;
            const double own = t.coef > 0.0 ? t.coef * box.lo[j] : t.coef * box.hi[j];
            const double limit = (r.rhs - (minact - own)) / t.coef;
            const bool binary = vars_[j].kind == VarKind::binary;
            const double range = box.hi[j] - box.lo[j];
            if (t.coef > 0.0) {
                double nh = limit + tol / std::abs(t.coef);
                if (binary) nh = std::floor(nh + kIntTol);
                if (nh < box.hi[j] - 1e-6 * std::max(range, 1e-3) || (binary && nh < box.hi[j])) {
                    if (nh < box.lo[j] - tol / std::abs(t.coef)) return false;
                    const double old = box.hi[j];
                    box.hi[j] = nh <= box.lo[j] + tol / std::abs(t.coef) ? box.lo[j] : nh;
                    if (box.hi[j] < old) changed.push_back(t.var);
                }
            } else {
                double nl = limit - tol / std::abs(t.coef);
                if (binary) nl = std::ceil(nl - kIntTol);
                if (nl > box.lo[j] + 1e-6 * std::max(range, 1e-3) || (binary && nl > box.lo[j])) {
                    if (nl > box.hi[j] + tol / std::abs(t.coef)) return false;
                    const double old = box.lo[j];
                    box.lo[j] = nl >= box.hi[j] - tol / std::abs(t.coef) ? box.hi[j] : nl;
                    if (box.lo[j] > old) changed.push_back(t.var);
                }
            }
        }
        return true;
    }

    const std::vector<LeRow>& rows_;
    const std::vector<Variable>& vars_;
    std::vector<std::vector<int>> var_rows_;
};

struct NodeLp {
    bool feasible = false;
    std::vector<double> x;  // full-length
    double objective = 0.0; // minimization sense
    std::vector<double> reduced;  // with `bound`, empty when unavailable
    double bound = 0.0;
};

// Builds the reduced LP over the free columns of `box`, with single-binary
// big-M rows tightened to the node's bounds, and solves it.
NodeLp solve_node_lp(const ModelSpec& model, const std::vector<LeRow>& rows, const Box& box,
                     double obj_sign, bool tighten) {
    const auto& vars = model.variables();
    const std::size_t n = vars.size();
    std::vector<int> col(n, -1);
    std::vector<double> fixed(n, 0.0);
    LpProblem lp;
    for (std::size_t j = 0; j < n; ++j) {
        if (box.hi[j] - box.lo[j] > kFixedTol) {
            col[j] = static_cast<int>(lp.lower.size());
            lp.lower.push_back(box.lo[j]);
            lp.upper.push_back(box.hi[j]);
            lp.cost.push_back(0.0);
        } else {
            double v = 0.5 * (box.lo[j] + box.hi[j]);
            if (vars[j].kind == VarKind::binary) v = std::round(v);
            fixed[j] = v;
        }
    }
    double obj_const = 0.0;
    for (const auto& t : model.objective()) {
        if (col[t.var] >= 0) lp.cost[col[t.var]] += obj_sign * t.coef;
        else obj_const += obj_sign * t.coef * fixed[t.var];
    }

    NodeLp out;
    for (const auto& r : rows) {
        LpRow row;
        row.cmp = Cmp::le;
        double rhs = r.rhs;
        double maxact = 0.0;
        double scale = std::abs(r.rhs);
        int binary_pos = -1;
        int binaries = 0;
        for (const auto& t : r.terms) {
            if (col[t.var] < 0) {
                rhs -= t.coef * fixed[t.var];
                scale = std::max(scale, std::abs(t.coef * fixed[t.var]));
                continue;
            }
            const auto j = static_cast<std::size_t>(t.var);
            maxact += t.coef > 0.0 ? t.coef * box.hi[j] : t.coef * box.lo[j];
            if (vars[j].kind == VarKind::binary) {
                ++binaries;
                binary_pos = static_cast<int>(row.terms.size());
            }
            row.terms.push_back({col[t.var], t.coef});
        }
        const double tol = 1e-9 * (1.0 + scale);
        if (row.terms.empty()) {
            if (rhs < -1e-7 * (1.0 + scale)) return out;
            continue;
        }
        if (maxact <= rhs + tol) continue;  // redundant at this node
        if (tighten && binaries == 1) {
            const double c = row.terms[binary_pos].coef;
            const double maxrest = maxact - std::max(c, 0.0);
            if (c < 0.0) {
                if (maxrest <= rhs + tol) continue;
                if (maxrest < rhs - c) row.terms[binary_pos].coef = rhs - maxrest;
            } else if (maxrest < rhs) {
                const double nc = c - (rhs - maxrest);
                if (nc <= 0.0) continue;
                row.terms[binary_pos].coef = nc;
                rhs = maxrest;
            }
        }
        row.rhs = rhs;
        lp.rows.push_back(std::move(row));
    }

    const LpOutcome res = detail::solve_lp(lp);
    if (res.status != LpStatus::optimal) return out;
    out.feasible = true;
    out.x = fixed;
    for (std::size_t j = 0; j < n; ++j)
        if (col[j] >= 0) out.x[j] = res.x[col[j]];
    out.objective = res.objective + obj_const;
    return out;
}

// Rows for the warm-started node LP: equalities kept as ranges, inequalities
// in <= form with single-binary coefficients tightened to the root box.
std::vector<detail::RangeRow> root_rows(const ModelSpec& model, const Box& box) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const auto& vars = model.variables();
    std::vector<detail::RangeRow> out;
    for (const auto& c : model.constraints()) {
        detail::RangeRow row;
        if (c.cmp == Cmp::eq) {
            for (const auto& t : c.terms)
                if (t.coef != 0.0) row.terms.emplace_back(t.var, t.coef);
            row.lo = row.hi = c.rhs;
            out.push_back(std::move(row));
            continue;
        }
        const double s = c.cmp == Cmp::le ? 1.0 : -1.0;
        double rhs = s * c.rhs;
        double maxact = 0.0;
        double scale = std::abs(rhs);
        int binary_pos = -1;
        int binaries = 0;
        for (const auto& t : c.terms) {
            const double a = s * t.coef;
            if (a == 0.0) continue;
            const auto j = static_cast<std::size_t>(t.var);
            const double v = a > 0.0 ? a * box.hi[j] : a * box.lo[j];
            maxact += v;
            scale = std::max(scale, std::abs(v));
            if (vars[j].kind == VarKind::binary && box.hi[j] - box.lo[j] > kFixedTol) {
                ++binaries;
                binary_pos = static_cast<int>(row.terms.size());
            }
            row.terms.emplace_back(t.var, a);
        }
        const double tol = 1e-9 * (1.0 + scale);
        if (maxact <= rhs + tol) continue;
        if (binaries == 1) {
            const double a = row.terms[binary_pos].second;
            const double maxrest = maxact - std::max(a, 0.0);
            if (a < 0.0) {
                if (maxrest <= rhs + tol) continue;
                if (maxrest < rhs - a) row.terms[binary_pos].second = rhs - maxrest;
            } else if (maxrest < rhs) {
                const double na = a - (rhs - maxrest);
                if (na <= 0.0) continue;
                row.terms[binary_pos].second = na;
                rhs = maxrest;
            }
        }
        row.lo = -inf;
        row.hi = rhs;
        out.push_back(std::move(row));
    }
    return out;
}

double scaled_violation(const ModelSpec& model, std::span<const double> x) {
    double worst = 0.0;
    const auto& vars = model.variables();
    for (std::size_t j = 0; j < vars.size(); ++j) {
        const double s = 1.0 + std::max(std::abs(vars[j].lower), std::abs(vars[j].upper));
        worst = std::max({worst, (vars[j].lower - x[j]) / s, (x[j] - vars[j].upper) / s});
        if (vars[j].kind == VarKind::binary) worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
    }
    for (const auto& row : model.constraints()) {
        double act = 0.0;
        double s = 1.0 + std::abs(row.rhs);
        for (const auto& t : row.terms) {
            const double v = t.coef * x[static_cast<std::size_t>(t.var)];
            act += v;
            s = std::max(s, std::abs(v));
        }
        double v = 0.0;
        switch (row.cmp) {
            case Cmp::le: v = act - row.rhs; break;
            case Cmp::ge: v = row.rhs - act; break;
            case Cmp::eq: v = std::abs(act - row.rhs); break;
        }
        worst = std::max(worst, v / s);
    }
    return worst;
}

struct Node {
    std::vector<std::pair<int, char>> fixings;
    double bound = -std::numeric_limits<double>::infinity();
    std::int64_t id = 0;
    int branched = -1;  // variable fixed last, for pseudocost updates
    int up = 0;
    double change = 0.0;
};

struct WorseBound {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.id > b.id;
    }
};

class BranchAndBound {
public:
    BranchAndBound(const ModelSpec& model, const SolveOptions& opt)
        : model_(model), opt_(opt), rows_(normalize_rows(model)), prop_(rows_, model.variables()),
          sign_(model.sense() == Sense::maximize ? -1.0 : 1.0),
          start_(std::chrono::steady_clock::now()) {
        for (const auto& v : model.variables()) {
            root_.lo.push_back(v.lower);
            root_.hi.push_back(v.upper);
        }
        for (const auto& t : model.objective()) cutoff_.terms.push_back({t.var, sign_ * t.coef});
        for (int d = 0; d < 2; ++d) {
            pc_sum_[d].assign(model.num_variables(), 0.0);
            pc_count_[d].assign(model.num_variables(), 0);
        }
    }

    MilpSolution run();

private:
    bool has_incumbent() const { return !incumbent_.empty(); }
    double abs_gap(double value) const {
        return std::max(opt_.gap_tolerance, kNumericGap) * std::max(1.0, std::abs(value));
    }
    bool offer(std::vector<double> x);
    NodeLp node_lp(const Box& box);
    void process(Node node);
    bool out_of_time() const {
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
        return dt.count() > opt_.time_limit_seconds;
    }

    const ModelSpec& model_;
    const SolveOptions& opt_;
    std::vector<LeRow> rows_;
    Propagator prop_;
    double sign_;
    std::chrono::steady_clock::time_point start_;
    Box root_;
    LeRow cutoff_;
    std::vector<double> incumbent_;
    double incumbent_obj_ = std::numeric_limits<double>::infinity();  // min sense
    double pseudocost(int j, int up) const;
    std::unique_ptr<detail::DualSimplex> simplex_;
    std::vector<double> pc_sum_[2];
    std::vector<int> pc_count_[2];
    double pc_default_[2] = {1.0, 1.0};  // mean over initialized variables
    double pc_total_[2] = {0.0, 0.0};
    int pc_initialized_[2] = {0, 0};
    std::vector<Node> stack_;
    std::priority_queue<Node, std::vector<Node>, WorseBound> heap_;
    std::int64_t next_id_ = 0;
    std::int64_t nodes_ = 0;
};

bool BranchAndBound::offer(std::vector<double> x) {
    const auto& vars = model_.variables();
    for (std::size_t j = 0; j < vars.size(); ++j) {
        if (vars[j].kind == VarKind::binary) x[j] = std::round(x[j]);
        x[j] = std::clamp(x[j], vars[j].lower, vars[j].upper);
    }
    if (scaled_violation(model_, x) > opt_.feasibility_tolerance) return false;
    const double obj = sign_ * model_.evaluate_objective(x);
    if (obj < incumbent_obj_) {
        incumbent_obj_ = obj;
        incumbent_ = std::move(x);
        cutoff_.rhs = incumbent_obj_ + abs_gap(incumbent_obj_);
    }
    return true;
}

NodeLp BranchAndBound::node_lp(const Box& box) {
    if (!simplex_) return solve_node_lp(model_, rows_, box, sign_, true);
    simplex_->set_bounds(box.lo, box.hi);
    const double cut = has_incumbent() ? incumbent_obj_ - abs_gap(incumbent_obj_)
                                       : std::numeric_limits<double>::infinity();
    NodeLp out;
    const auto rr = simplex_->solve(cut);
    switch (rr) {
        case detail::DualSimplex::Result::optimal:
            out.feasible = true;
            out.x = simplex_->values();
            out.bound = simplex_->dual_bound();
            out.objective = std::min(simplex_->objective(), out.bound);
            out.reduced = simplex_->reduced_costs();
            return out;
        case detail::DualSimplex::Result::infeasible:
        case detail::DualSimplex::Result::cutoff:
            return out;
        case detail::DualSimplex::Result::failed:
            break;
    }
    return solve_node_lp(model_, rows_, box, sign_, true);
}

void BranchAndBound::process(Node node) {
    ++nodes_;
    if (has_incumbent() && node.bound >= incumbent_obj_ - abs_gap(incumbent_obj_)) return;
    Box box = root_;
    for (const auto& [j, v] : node.fixings) {
        box.lo[j] = v;
        box.hi[j] = v;
    }
    if (!prop_.run(box, has_incumbent() ? &cutoff_ : nullptr)) return;
    NodeLp lp = node_lp(box);
    if (!lp.feasible) return;
    if (node.branched >= 0 && std::isfinite(node.bound) && node.change > 0.0) {
        const int d = node.up;
        const int j = node.branched;
        const double old = pc_count_[d][j] > 0 ? pc_sum_[d][j] / pc_count_[d][j] : 0.0;
        pc_sum_[d][j] += std::max(0.0, lp.objective - node.bound) / node.change;
        ++pc_count_[d][j];
        if (pc_count_[d][j] == 1) ++pc_initialized_[d];
        pc_total_[d] += pc_sum_[d][j] / pc_count_[d][j] - old;
        pc_default_[d] = pc_total_[d] / pc_initialized_[d];
    }
    if (has_incumbent() && lp.objective >= incumbent_obj_ - abs_gap(incumbent_obj_)) return;

    const auto& vars = model_.variables();
    if (has_incumbent() && !lp.reduced.empty()) {
        const double limit = incumbent_obj_ - abs_gap(incumbent_obj_) - lp.bound;
        for (std::size_t j = 0; j < vars.size(); ++j) {
            if (vars[j].kind != VarKind::binary || box.hi[j] - box.lo[j] < 0.5) continue;
            const double d = lp.reduced[j];
            if (std::abs(d) >= limit) node.fixings.emplace_back(static_cast<int>(j), d > 0.0 ? 0 : 1);
        }
    }
    int branch = -1;
    double best = -1.0;
    double branch_frac = 0.0;
    bool rounded_change = false;
    for (std::size_t j = 0; j < vars.size(); ++j) {
        if (vars[j].kind != VarKind::binary) continue;
        const double f = lp.x[j] - std::floor(lp.x[j]);
        const double dist = std::min(f, 1.0 - f);
        if (dist > kIntTol) {
            const int v = static_cast<int>(j);
            const double score = std::max(pseudocost(v, 0) * f, 1e-6) * std::max(pseudocost(v, 1) * (1.0 - f), 1e-6);
            if (score > best) {
                best = score;
                branch = v;
                branch_frac = f;
            }
        } else if (dist > 1e-12) {
            rounded_change = true;
        }
    }
    if (branch < 0) {
        const bool offered = !rounded_change && offer(lp.x);
        if (!offered || lp.objective < incumbent_obj_ - abs_gap(incumbent_obj_)) {
            // Re-solve with binaries pinned so continuous values are consistent.
            Box fixed = box;
            for (std::size_t j = 0; j < vars.size(); ++j) {
                if (vars[j].kind != VarKind::binary) continue;
                fixed.lo[j] = fixed.hi[j] = std::round(lp.x[j]);
            }
            NodeLp again = solve_node_lp(model_, rows_, fixed, sign_, false);
            if (again.feasible) offer(std::move(again.x));
        }
        if (!has_incumbent() || lp.objective < incumbent_obj_ - abs_gap(incumbent_obj_)) {
            // the bound does not cover this point; keep splitting
            for (std::size_t j = 0; j < vars.size() && branch < 0; ++j)
                if (vars[j].kind == VarKind::binary && box.hi[j] - box.lo[j] > 0.5) {
                    branch = static_cast<int>(j);
                    branch_frac = lp.x[j] - std::floor(lp.x[j]);
                }
        }
        if (branch < 0) return;
    }
    const double up_first = lp.x[static_cast<std::size_t>(branch)] >= 0.5;
    Node down{node.fixings, lp.objective, next_id_++, branch, 0, branch_frac};
    down.fixings.emplace_back(branch, 0);
    Node up{std::move(node.fixings), lp.objective, next_id_++, branch, 1, 1.0 - branch_frac};
    up.fixings.emplace_back(branch, 1);
    if (has_incumbent()) {
        heap_.push(std::move(down));
        heap_.push(std::move(up));
    } else if (up_first) {
        stack_.push_back(std::move(down));
        stack_.push_back(std::move(up));
    } else {
        stack_.push_back(std::move(up));
        stack_.push_back(std::move(down));
    }
}

double BranchAndBound::pseudocost(int j, int up) const {
    if (pc_count_[up][j] > 0) return pc_sum_[up][j] / pc_count_[up][j];
    return pc_default_[up];
}

MilpSolution BranchAndBound::run() {
    MilpSolution sol;
    if (opt_.initial_solution && opt_.initial_solution->size() == model_.num_variables())
        offer(*opt_.initial_solution);

    if (!prop_.run(root_, has_incumbent() ? &cutoff_ : nullptr)) {
        if (has_incumbent()) {
            // The cutoff row can only empty the box when the start is optimal.
            sol.status = Status::optimal;
            sol.values = incumbent_;
            sol.objective = model_.evaluate_objective(sol.values);
            sol.best_bound = sol.objective;
        }
        return sol;
    }
    {
        std::vector<double> cost(model_.num_variables(), 0.0);
        for (const auto& t : model_.objective()) cost[static_cast<std::size_t>(t.var)] += sign_ * t.coef;
        simplex_ = std::make_unique<detail::DualSimplex>(static_cast<int>(model_.num_variables()),
                                                         root_rows(model_, root_), std::move(cost));
    }
    stack_.push_back(Node{{}, -std::numeric_limits<double>::infinity(), next_id_++});

    Status stop = Status::optimal;
    bool stopped = false;
    while (!stack_.empty() || !heap_.empty()) {
        if (out_of_time()) {
            stop = Status::time_limit;
            stopped = true;
            break;
        }
        if (nodes_ >= opt_.node_limit) {
            stop = Status::gap_limit;
            stopped = true;
            break;
        }
        if (has_incumbent() && !stack_.empty()) {
            for (auto& n : stack_) heap_.push(std::move(n));
            stack_.clear();
        }
        if (!stack_.empty()) {
            Node n = std::move(stack_.back());
            stack_.pop_back();
            process(std::move(n));
        } else {
            if (heap_.top().bound >= incumbent_obj_ - abs_gap(incumbent_obj_)) {
                // every open node is within the gap of the incumbent
                while (!heap_.empty()) heap_.pop();
                break;
            }
            Node n = heap_.top();
            heap_.pop();
            process(std::move(n));
        }
    }

    double open_bound = std::numeric_limits<double>::infinity();
    if (!heap_.empty()) open_bound = std::min(open_bound, heap_.top().bound);
    for (const auto& n : stack_) open_bound = std::min(open_bound, n.bound);

    sol.nodes = nodes_;
    if (!has_incumbent()) {
        sol.status = stopped ? stop : Status::infeasible;
        sol.best_bound = sign_ * open_bound;
        return sol;
    }
    sol.values = incumbent_;
    sol.objective = model_.evaluate_objective(sol.values);
    const double bound_min = std::min(open_bound, incumbent_obj_);
    sol.best_bound = sign_ * bound_min;
    sol.gap = stopped ? (incumbent_obj_ - bound_min) / std::max(1.0, std::abs(incumbent_obj_)) : 0.0;
    if (!stopped || sol.gap <= opt_.gap_tolerance) {
        sol.status = Status::optimal;
        if (!stopped) {
            // closed by pruning: gap is at most the pruning tolerance
            sol.gap = 0.0;
        }
    } else {
        sol.status = stop;
    }
    return sol;
}

}  // namespace

MilpSolution solve(const ModelSpec& model, const SolveOptions& options) {
    if (options.gap_tolerance < 0.0) throw InvalidArgument("gap tolerance must be non-negative");
    BranchAndBound bb(model, options);
    return bb.run();
}

RelaxationResult solve_relaxation(const ModelSpec& model) {
    const auto rows = normalize_rows(model);
    Box box;
    for (const auto& v : model.variables()) {
        box.lo.push_back(v.lower);
        box.hi.push_back(v.upper);
    }
    const double sign = model.sense() == Sense::maximize ? -1.0 : 1.0;
    NodeLp lp = solve_node_lp(model, rows, box, sign, false);
    RelaxationResult out;
    out.feasible = lp.feasible;
    if (lp.feasible) {
        out.values = std::move(lp.x);
        out.objective = model.evaluate_objective(out.values);
    }
    return out;
}

}  // namespace genco::milp
