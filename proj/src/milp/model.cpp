#include <algorithm>
#include <cmath>

#include "genco/milp.hpp"

namespace genco::milp {

int ModelSpec::add_variable(double lower, double upper, VarKind kind, std::string name) {
    if (!std::isfinite(lower) || !std::isfinite(upper))
        throw InvalidArgument("variable bounds must be finite");
    if (lower > upper)
        throw InvalidArgument("variable lower bound exceeds upper bound");
    if (kind == VarKind::binary && (lower < 0.0 || upper > 1.0))
        throw InvalidArgument("binary variable bounds must lie within [0,1]");
    const int id = static_cast<int>(vars_.size());
    if (name.empty()) name = "x" + std::to_string(id);
    vars_.push_back({lower, upper, kind, std::move(name)});
    return id;
}

void ModelSpec::check_terms(const std::vector<Term>& terms) const {
    for (const auto& t : terms) {
        if (t.var < 0 || static_cast<std::size_t>(t.var) >= vars_.size())
            throw InvalidArgument("term references undeclared variable " + std::to_string(t.var));
        if (!std::isfinite(t.coef)) throw InvalidArgument("non-finite coefficient");
    }
}

void ModelSpec::add_constraint(std::vector<Term> terms, Cmp cmp, double rhs, std::string name) {
    check_terms(terms);
    if (!std::isfinite(rhs)) throw InvalidArgument("non-finite right-hand side");
    if (name.empty()) name = "c" + std::to_string(rows_.size());
    rows_.push_back({std::move(terms), cmp, rhs, std::move(name)});
}

void ModelSpec::set_objective(std::vector<Term> terms, Sense sense) {
    check_terms(terms);
    objective_ = std::move(terms);
    sense_ = sense;
}

void ModelSpec::set_bounds(int var, double lower, double upper) {
    if (var < 0 || static_cast<std::size_t>(var) >= vars_.size())
        throw InvalidArgument("unknown variable " + std::to_string(var));
    if (!std::isfinite(lower) || !std::isfinite(upper) || lower > upper)
        throw InvalidArgument("invalid bounds");
    auto& v = vars_[static_cast<std::size_t>(var)];
    if (v.kind == VarKind::binary && (lower < 0.0 || upper > 1.0))
        throw InvalidArgument("binary variable bounds must lie within [0,1]");
    v.lower = lower;
    v.upper = upper;
}

std::size_t ModelSpec::num_binaries() const noexcept {
    return static_cast<std::size_t>(std::count_if(
        vars_.begin(), vars_.end(), [](const Variable& v) { return v.kind == VarKind::binary; }));
}

double ModelSpec::evaluate_objective(std::span<const double> x) const {
    double value = 0.0;
    for (const auto& t : objective_) value += t.coef * x[static_cast<std::size_t>(t.var)];
    return value;
}

double ModelSpec::max_violation(std::span<const double> x) const {
    if (x.size() != vars_.size()) throw InvalidArgument("solution size does not match model");
    double worst = 0.0;
    for (std::size_t j = 0; j < vars_.size(); ++j) {
        const auto& v = vars_[j];
        worst = std::max({worst, v.lower - x[j], x[j] - v.upper});
        if (v.kind == VarKind::binary) worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
    }
    for (const auto& row : rows_) {
        double act = 0.0;
        for (const auto& t : row.terms) act += t.coef * x[static_cast<std::size_t>(t.var)];
        switch (row.cmp) {
            case Cmp::le: worst = std::max(worst, act - row.rhs); break;
            case Cmp::ge: worst = std::max(worst, row.rhs - act); break;
            case Cmp::eq: worst = std::max(worst, std::abs(act - row.rhs)); break;
        }
    }
    return worst;
}

std::string_view to_string(Status s) noexcept {
    switch (s) {
        case Status::optimal: return "optimal";
        case Status::infeasible: return "infeasible";
        case Status::gap_limit: return "gap_limit";
        case Status::time_limit: return "time_limit";
    }
    return "unknown";
}

}  // namespace genco::milp
