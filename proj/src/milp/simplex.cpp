#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace genco::milp::detail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kOptTol = 1e-9;
constexpr double kDrop = 1e-13;
constexpr int kRefreshEvery = 100;
constexpr int kBlandAfter = 40;

enum : char { kBasic = 0, kAtLower = 1, kAtUpper = 2 };

class Tableau {
public:
    explicit Tableau(const LpProblem& p);
    LpOutcome run();

private:
    double* row(int i) { return tab_.data() + static_cast<std::size_t>(i) * ncols_; }
    void reduced_costs();
    void refresh_values();
    bool optimize_phase(long& iters, long max_iters);
    void pivot(int r, int j);
    std::vector<double> structural_values() const;

    const LpProblem& p_;
    int m_ = 0;
    int n_ = 0;
    int ncols_ = 0;
    std::vector<double> tab_;
    std::vector<double> beta_;
    std::vector<int> basis_;
    std::vector<char> state_;
    std::vector<double> ub_;
    std::vector<double> cost_;
    std::vector<double> d_;
    std::vector<int> ident_;                               // column that started as e_i
    std::vector<double> rhs_;                              // shifted, sign-adjusted
    std::vector<std::vector<std::pair<int, double>>> rows_; // structural part, adjusted
    std::vector<double> sign_of_col_;                      // entry of slack/surplus column (+1/-1)
    std::vector<int> row_of_col_;                          // row of slack/surplus/artificial column
    std::vector<int> artificials_;
    std::vector<int> nz_;
};

Tableau::Tableau(const LpProblem& p) : p_(p) {
    n_ = static_cast<int>(p.lower.size());
    std::vector<int> active;
    for (int i = 0; i < static_cast<int>(p.rows.size()); ++i) active.push_back(i);
    m_ = static_cast<int>(active.size());

    rhs_.assign(m_, 0.0);
    rows_.resize(m_);
    std::vector<Cmp> cmp(m_);
    int n_slack = 0;
    int n_art = 0;
    for (int i = 0; i < m_; ++i) {
        const auto& src = p.rows[active[i]];
        double b = src.rhs;
        for (const auto& t : src.terms) b -= t.coef * p.lower[t.var];
        const double sgn = b < 0.0 ? -1.0 : 1.0;
        Cmp c = src.cmp;
        if (sgn < 0.0 && c != Cmp::eq) c = (c == Cmp::le) ? Cmp::ge : Cmp::le;
        cmp[i] = c;
        rhs_[i] = sgn * b;
        // merge duplicate terms
        std::vector<std::pair<int, double>> entries;
        for (const auto& t : src.terms) entries.emplace_back(t.var, sgn * t.coef);
        std::sort(entries.begin(), entries.end());
        for (const auto& e : entries) {
            if (!rows_[i].empty() && rows_[i].back().first == e.first)
                rows_[i].back().second += e.second;
            else
                rows_[i].push_back(e);
        }
        if (c != Cmp::eq) ++n_slack;
        if (c != Cmp::le) ++n_art;
    }
    ncols_ = n_ + n_slack + n_art;
    tab_.assign(static_cast<std::size_t>(m_) * ncols_, 0.0);
    beta_.assign(m_, 0.0);
    basis_.assign(m_, -1);
    state_.assign(ncols_, kAtLower);
    ub_.assign(ncols_, kInf);
    cost_.assign(ncols_, 0.0);
    d_.assign(ncols_, 0.0);
    ident_.assign(m_, -1);
    sign_of_col_.assign(ncols_, 0.0);
    row_of_col_.assign(ncols_, -1);

    for (int j = 0; j < n_; ++j) ub_[j] = p.upper[j] - p.lower[j];
    int next_slack = n_;
    int next_art = n_ + n_slack;
    for (int i = 0; i < m_; ++i) {
        double* r = row(i);
        for (const auto& [j, a] : rows_[i]) r[j] = a;
        beta_[i] = rhs_[i];
        if (cmp[i] == Cmp::le) {
            const int s = next_slack++;
            r[s] = 1.0;
            sign_of_col_[s] = 1.0;
            row_of_col_[s] = i;
            basis_[i] = s;
            state_[s] = kBasic;
            ident_[i] = s;
        } else {
            if (cmp[i] == Cmp::ge) {
                const int s = next_slack++;
                r[s] = -1.0;
                sign_of_col_[s] = -1.0;
                row_of_col_[s] = i;
            }
            const int a = next_art++;
            r[a] = 1.0;
            sign_of_col_[a] = 1.0;
            row_of_col_[a] = i;
            basis_[i] = a;
            state_[a] = kBasic;
            ident_[i] = a;
            artificials_.push_back(a);
        }
    }
}

void Tableau::reduced_costs() {
    d_ = cost_;
    for (int i = 0; i < m_; ++i) {
        const double cb = cost_[basis_[i]];
        if (cb == 0.0) continue;
        const double* r = row(i);
        for (int j = 0; j < ncols_; ++j) d_[j] -= cb * r[j];
    }
    for (int i = 0; i < m_; ++i) d_[basis_[i]] = 0.0;
}

// beta = B^-1 (b - sum_{nonbasic at upper} A_j ub_j), with one refinement step.
void Tableau::refresh_values() {
    std::vector<double> r(rhs_);
    for (int i = 0; i < m_; ++i)
        for (const auto& [j, a] : rows_[i])
            if (state_[j] == kAtUpper) r[i] -= a * ub_[j];
    auto apply_inverse = [&](const std::vector<double>& v) {
        std::vector<double> out(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            const double* t = row(i);
            double s = 0.0;
            for (int k = 0; k < m_; ++k)
                if (v[k] != 0.0) s += t[ident_[k]] * v[k];
            out[i] = s;
        }
        return out;
    };
    beta_ = apply_inverse(r);
    // residual r - B beta using original columns
    std::vector<double> res(r);
    std::vector<double> value(ncols_, 0.0);
    for (int i = 0; i < m_; ++i) value[basis_[i]] = beta_[i];
    for (int i = 0; i < m_; ++i) {
        for (const auto& [j, a] : rows_[i])
            if (state_[j] == kBasic) res[i] -= a * value[j];
    }
    for (int c = n_; c < ncols_; ++c)
        if (state_[c] == kBasic) res[row_of_col_[c]] -= sign_of_col_[c] * value[c];
    const auto corr = apply_inverse(res);
    for (int i = 0; i < m_; ++i) beta_[i] += corr[i];
}

void Tableau::pivot(int r, int j) {
    double* pr = row(r);
    const double inv = 1.0 / pr[j];
    nz_.clear();
    for (int k = 0; k < ncols_; ++k) {
        if (pr[k] == 0.0) continue;
        pr[k] *= inv;
        if (std::abs(pr[k]) < kDrop) {
            pr[k] = 0.0;
            continue;
        }
        nz_.push_back(k);
    }
    pr[j] = 1.0;
    for (int i = 0; i < m_; ++i) {
        if (i == r) continue;
        double* pi = row(i);
        const double f = pi[j];
        if (f == 0.0) continue;
        for (int k : nz_) {
            double v = pi[k] - f * pr[k];
            pi[k] = std::abs(v) < kDrop ? 0.0 : v;
        }
        pi[j] = 0.0;
    }
    const double dj = d_[j];
    if (dj != 0.0) {
        for (int k : nz_) d_[k] -= dj * pr[k];
        d_[j] = 0.0;
    }
}

bool Tableau::optimize_phase(long& iters, long max_iters) {
    int degenerate = 0;
    while (true) {
        if (iters >= max_iters) return false;
        if (iters % kRefreshEvery == 0 && iters > 0) {
            refresh_values();
            reduced_costs();
        }
        const bool bland = degenerate > kBlandAfter;
        int enter = -1;
        double best = 0.0;
        for (int j = 0; j < ncols_; ++j) {
            if (state_[j] == kBasic || ub_[j] <= 0.0) continue;
            const double dj = d_[j];
            double score = 0.0;
            if (state_[j] == kAtLower && dj < -kOptTol) score = -dj;
            else if (state_[j] == kAtUpper && dj > kOptTol) score = dj;
            else continue;
            if (bland) {
                enter = j;
                break;
            }
            if (score > best) {
                best = score;
                enter = j;
            }
        }
        if (enter < 0) return true;

        const double dir = state_[enter] == kAtLower ? 1.0 : -1.0;
        double t_best = ub_[enter];
        int leave = -1;
        bool leave_to_upper = false;
        double alpha_best = 0.0;
        for (int i = 0; i < m_; ++i) {
            const double alpha = dir * row(i)[enter];
            double t;
            bool to_upper;
            if (alpha > kPivotTol) {
                t = std::max(0.0, beta_[i]) / alpha;
                to_upper = false;
            } else if (alpha < -kPivotTol) {
                const double u = ub_[basis_[i]];
                if (u == kInf) continue;
                t = std::max(0.0, u - beta_[i]) / -alpha;
                to_upper = true;
            } else {
                continue;
            }
            const double tie = t_best == kInf ? 0.0 : 1e-12 * (1.0 + t_best);
            bool take = false;
            if (t < t_best - tie) {
                take = true;
            } else if (leave >= 0 && t <= t_best + tie) {
                take = bland ? basis_[i] < basis_[leave] : std::abs(alpha) > std::abs(alpha_best);
            }
            if (take) {
                t_best = t;
                leave = i;
                leave_to_upper = to_upper;
                alpha_best = alpha;
            }
        }
        if (t_best == kInf) return true;  // cannot happen with bounded structurals
        ++iters;
        degenerate = (t_best <= 1e-12) ? degenerate + 1 : 0;

        for (int i = 0; i < m_; ++i) {
            const double a = row(i)[enter];
            if (a != 0.0) beta_[i] -= dir * t_best * a;
        }
        if (leave < 0) {
            state_[enter] = state_[enter] == kAtLower ? kAtUpper : kAtLower;
            continue;
        }
        const double start = state_[enter] == kAtLower ? 0.0 : ub_[enter];
        const int out = basis_[leave];
        state_[out] = leave_to_upper ? kAtUpper : kAtLower;
        pivot(leave, enter);
        basis_[leave] = enter;
        state_[enter] = kBasic;
        beta_[leave] = start + dir * t_best;
    }
}

std::vector<double> Tableau::structural_values() const {
    std::vector<double> x(n_, 0.0);
    for (int j = 0; j < n_; ++j)
        if (state_[j] == kAtUpper) x[j] = ub_[j];
    for (int i = 0; i < m_; ++i)
        if (basis_[i] < n_) x[basis_[i]] = std::clamp(beta_[i], 0.0, ub_[basis_[i]]);
    for (int j = 0; j < n_; ++j) x[j] += p_.lower[j];
    return x;
}

LpOutcome Tableau::run() {
    LpOutcome out;
    for (int j = 0; j < n_; ++j) {
        if (ub_[j] < 0.0) return out;  // inverted bounds
    }
    long iters = 0;
    const long max_iters = 50L * (m_ + ncols_) + 1000;

    if (!artificials_.empty()) {
        for (int a : artificials_) cost_[a] = 1.0;
        reduced_costs();
        if (!optimize_phase(iters, max_iters)) {
            out.status = LpStatus::iteration_limit;
            return out;
        }
        refresh_values();
        double infeas = 0.0;
        double scale = 1.0;
        for (double b : rhs_) scale = std::max(scale, std::abs(b));
        for (int i = 0; i < m_; ++i)
            if (std::find(artificials_.begin(), artificials_.end(), basis_[i]) != artificials_.end())
                infeas += std::max(0.0, beta_[i]);
        if (infeas > 1e-7 * scale) {
            out.iterations = iters;
            return out;
        }
        for (int a : artificials_) {
            cost_[a] = 0.0;
            ub_[a] = 0.0;
            if (state_[a] == kAtUpper) state_[a] = kAtLower;
        }
    }
    for (int j = 0; j < n_; ++j) cost_[j] = p_.cost[j];
    reduced_costs();
    if (!optimize_phase(iters, max_iters)) {
        out.status = LpStatus::iteration_limit;
        return out;
    }
    refresh_values();
    out.status = LpStatus::optimal;
    out.x = structural_values();
    out.objective = 0.0;
    for (int j = 0; j < n_; ++j) out.objective += p_.cost[j] * out.x[j];
    out.iterations = iters;
    return out;
}

}  // namespace

LpOutcome solve_lp(const LpProblem& problem) {
    Tableau t(problem);
    return t.run();
}

}  // namespace genco::milp::detail
