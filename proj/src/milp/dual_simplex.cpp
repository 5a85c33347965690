#include "dual_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace genco::milp::detail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-7;
constexpr double kZero = 1e-11;
constexpr double kDrop = 1e-14;
constexpr double kSmallPivot = 1e-6;
constexpr int kRefactorEvery = 300;
constexpr int kAtLower = -1;
constexpr int kAtUpper = -2;

}  // namespace

DualSimplex::DualSimplex(int num_columns, std::vector<RangeRow> rows, std::vector<double> cost)
    : n_(num_columns), m_(static_cast<int>(rows.size())), ncols_(num_columns + static_cast<int>(rows.size())),
      rows_(std::move(rows)), cost_(std::move(cost)) {
    cost_.resize(static_cast<std::size_t>(ncols_), 0.0);
    cols_.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < m_; ++i)
        for (const auto& [j, a] : rows_[i].terms) cols_[j].emplace_back(i, a);
    lo_.assign(static_cast<std::size_t>(ncols_), 0.0);
    hi_.assign(static_cast<std::size_t>(ncols_), 0.0);
    for (int i = 0; i < m_; ++i) {
        lo_[n_ + i] = rows_[i].lo;
        hi_[n_ + i] = rows_[i].hi;
    }
    slack_basis();
}

double DualSimplex::value_of(int j) const {
    const int w = where_[j];
    if (w >= 0) return beta_[w];
    return w == kAtLower ? lo_[j] : hi_[j];
}

void DualSimplex::place_nonbasic(int j) {
    if (lo_[j] == -kInf) where_[j] = kAtUpper;
    else if (hi_[j] == kInf) where_[j] = kAtLower;
    else if (d_[j] > 0.0) where_[j] = kAtLower;
    else if (d_[j] < 0.0) where_[j] = kAtUpper;
    else if (where_[j] >= 0) where_[j] = kAtLower;
}

void DualSimplex::slack_basis() {
    tab_.assign(static_cast<std::size_t>(m_) * ncols_, 0.0);
    basis_.assign(static_cast<std::size_t>(m_), 0);
    where_.assign(static_cast<std::size_t>(ncols_), kAtLower);
    d_.assign(static_cast<std::size_t>(ncols_), 0.0);
    for (int i = 0; i < m_; ++i) {
        double* t = trow(i);
        for (const auto& [j, a] : rows_[i].terms) t[j] -= a;
        t[n_ + i] = 1.0;
        basis_[i] = n_ + i;
        where_[n_ + i] = i;
    }
    for (int j = 0; j < n_; ++j) {
        d_[j] = cost_[j];
        place_nonbasic(j);
    }
    beta_.assign(static_cast<std::size_t>(m_), 0.0);
    recompute_beta();
    since_refactor_ = 0;
}

void DualSimplex::recompute_beta() {
    std::fill(beta_.begin(), beta_.end(), 0.0);
    for (int j = 0; j < ncols_; ++j) {
        if (where_[j] >= 0) continue;
        const double x = value_of(j);
        if (x == 0.0) continue;
        for (int i = 0; i < m_; ++i) {
            const double t = trow(i)[j];
            if (t != 0.0) beta_[i] -= t * x;
        }
    }
}

bool DualSimplex::refactor() {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
    for (int k = 0; k < m_; ++k) {
        const int j = basis_[k];
        if (j < n_) {
            for (const auto& [i, a] : cols_[j]) B(i, k) += a;
        } else {
            B(j - n_, k) = -1.0;
        }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    if (!(lu.rcond() > 1e-13)) return false;
    const Eigen::MatrixXd inv = lu.inverse();
    for (int r = 0; r < m_; ++r) {
        double* t = trow(r);
        for (int j = 0; j < n_; ++j) {
            double s = 0.0;
            for (const auto& [i, a] : cols_[j]) s += a * inv(r, i);
            t[j] = std::abs(s) < kDrop ? 0.0 : s;
        }
        for (int i = 0; i < m_; ++i) {
            const double s = -inv(r, i);
            t[n_ + i] = std::abs(s) < kDrop ? 0.0 : s;
        }
    }
    Eigen::VectorXd cb(m_);
    for (int k = 0; k < m_; ++k) cb[k] = cost_[basis_[k]];
    const Eigen::VectorXd y = inv.transpose() * cb;
    for (int j = 0; j < n_; ++j) {
        double s = cost_[j];
        for (const auto& [i, a] : cols_[j]) s -= y[i] * a;
        d_[j] = s;
    }
    for (int i = 0; i < m_; ++i) d_[n_ + i] = y[i];
    for (int k = 0; k < m_; ++k) d_[basis_[k]] = 0.0;
    // restore dual feasibility of boxed columns; one-sided ones must already agree
    for (int j = 0; j < ncols_; ++j) {
        if (where_[j] >= 0) continue;
        const bool finite_box = lo_[j] != -kInf && hi_[j] != kInf;
        if (where_[j] == kAtLower && d_[j] < -kDualTol) {
            if (!finite_box) return false;
            where_[j] = kAtUpper;
        } else if (where_[j] == kAtUpper && d_[j] > kDualTol) {
            if (!finite_box) return false;
            where_[j] = kAtLower;
        }
    }
    recompute_beta();
    since_refactor_ = 0;
    return true;
}

void DualSimplex::set_bounds(std::span<const double> lo, std::span<const double> hi) {
    for (int j = 0; j < n_; ++j) {
        if (where_[j] >= 0) {
            lo_[j] = lo[j];
            hi_[j] = hi[j];
            continue;
        }
        const double before = value_of(j);
        lo_[j] = lo[j];
        hi_[j] = hi[j];
        place_nonbasic(j);
        const double delta = value_of(j) - before;
        if (delta == 0.0) continue;
        for (int i = 0; i < m_; ++i) {
            const double t = trow(i)[j];
            if (t != 0.0) beta_[i] -= t * delta;
        }
    }
}

void DualSimplex::pivot(int r, int q) {
    double* pr = trow(r);
    const double inv = 1.0 / pr[q];
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
    pr[q] = 1.0;
    for (int i = 0; i < m_; ++i) {
        if (i == r) continue;
        double* pi = trow(i);
        const double f = pi[q];
        if (f == 0.0) continue;
        for (int k : nz_) {
            const double v = pi[k] - f * pr[k];
            pi[k] = std::abs(v) < kDrop ? 0.0 : v;
        }
        pi[q] = 0.0;
    }
    const double dq = d_[q];
    if (dq != 0.0) {
        for (int k : nz_) d_[k] -= dq * pr[k];
    }
    d_[q] = 0.0;
}

DualSimplex::Result DualSimplex::solve(double cutoff) {
    const long max_iters = 20L * (m_ + ncols_) + 1000;
    const double cut = cutoff + 1e-9 * (1.0 + std::abs(cutoff));
    for (long it = 0; it < max_iters; ++it) {
        if (since_refactor_ >= kRefactorEvery && !refactor()) slack_basis();

        int r = -1;
        double worst = 0.0;
        double dir = 0.0;
        for (int i = 0; i < m_; ++i) {
            const int b = basis_[i];
            const double v = beta_[i];
            if (v < lo_[b] - kPrimalTol * (1.0 + std::abs(lo_[b]))) {
                if (lo_[b] - v > worst) {
                    worst = lo_[b] - v;
                    r = i;
                    dir = 1.0;
                }
            } else if (v > hi_[b] + kPrimalTol * (1.0 + std::abs(hi_[b]))) {
                if (v - hi_[b] > worst) {
                    worst = v - hi_[b];
                    r = i;
                    dir = -1.0;
                }
            }
        }
        if (r < 0) {
            const double obj = objective();
            if (since_refactor_ == 0 || dual_bound() >= obj - 1e-9 * (1.0 + std::abs(obj))) return Result::optimal;
            if (!refactor()) slack_basis();
            continue;
        }
        if (cutoff < kInf && objective() >= cut) {
            if (dual_bound() >= cut) return Result::cutoff;
            if (since_refactor_ > 0) {
                if (!refactor()) slack_basis();
                continue;
            }
        }

        const double* tr = trow(r);
        double theta_max = kInf;
        bool skipped = false;
        for (int j = 0; j < ncols_; ++j) {
            const int w = where_[j];
            if (w >= 0 || lo_[j] == hi_[j]) continue;
            const double a = tr[j] * dir;
            double dj;
            if (w == kAtLower && a < -kPivotTol) dj = d_[j];
            else if (w == kAtUpper && a > kPivotTol) dj = -d_[j];
            else {
                skipped = skipped || (w == kAtLower ? a < -kZero : a > kZero);
                continue;
            }
            theta_max = std::min(theta_max, (std::max(dj, 0.0) + kDualTol) / std::abs(a));
        }
        if (theta_max == kInf) {
            if (!skipped && proves_infeasible(r)) return Result::infeasible;
            if (since_refactor_ == 0) return Result::failed;
            if (!refactor()) slack_basis();
            continue;
        }
        int q = -1;
        double best_alpha = 0.0;
        for (int j = 0; j < ncols_; ++j) {
            const int w = where_[j];
            if (w >= 0 || lo_[j] == hi_[j]) continue;
            const double a = tr[j] * dir;
            double dj;
            if (w == kAtLower && a < -kPivotTol) dj = d_[j];
            else if (w == kAtUpper && a > kPivotTol) dj = -d_[j];
            else continue;
            if (std::max(dj, 0.0) / std::abs(a) <= theta_max && std::abs(a) > best_alpha) {
                best_alpha = std::abs(a);
                q = j;
            }
        }
        if (best_alpha < kSmallPivot && since_refactor_ > 0) {
            // small pivots are often drift; retry from a fresh factorization
            if (!refactor()) slack_basis();
            continue;
        }

        const int leaving = basis_[r];
        const double bound = dir > 0.0 ? lo_[leaving] : hi_[leaving];
        const double alpha = tr[q];
        const double step = -(bound - beta_[r]) / alpha;
        const double entering_value = value_of(q) + step;
        for (int i = 0; i < m_; ++i) {
            const double t = trow(i)[q];
            if (t != 0.0) beta_[i] -= t * step;
        }
        pivot(r, q);
        beta_[r] = entering_value;
        basis_[r] = q;
        where_[q] = r;
        where_[leaving] = dir > 0.0 ? kAtLower : kAtUpper;
        ++since_refactor_;
        ++total_iters_;
    }
    return Result::failed;
}

std::vector<double> DualSimplex::values() const {
    std::vector<double> x(static_cast<std::size_t>(n_));
    for (int j = 0; j < n_; ++j) x[j] = std::clamp(value_of(j), lo_[j], hi_[j]);
    return x;
}

std::vector<double> DualSimplex::reduced_costs() const {
    std::vector<double> d(cost_.begin(), cost_.begin() + n_);
    for (int j = 0; j < n_; ++j)
        for (const auto& [i, a] : cols_[j]) d[j] -= d_[n_ + i] * a;
    return d;
}

double DualSimplex::dual_bound() const {
    double s = 0.0;
    const auto d = reduced_costs();
    for (int j = 0; j < n_; ++j) s += d[j] > 0.0 ? d[j] * lo_[j] : d[j] * hi_[j];
    for (int i = 0; i < m_; ++i) {
        const double y = d_[n_ + i];
        if (std::abs(y) <= kDualTol) continue;
        const double b = y > 0.0 ? lo_[n_ + i] : hi_[n_ + i];
        if (!std::isfinite(b)) return -kInf;
        s += y * b;
    }
    return s;
}

bool DualSimplex::proves_infeasible(int r) const {
    // row r of the basis inverse combines the rows into 0 = g.x - rho.r,
    // which the bounds must be able to satisfy
    const double* tr = trow(r);
    double lo = 0.0, hi = 0.0, scale = 0.0;
    auto add = [&](double g, int j) {
        if (g == 0.0) return;
        const double a = g > 0.0 ? g * lo_[j] : g * hi_[j];
        const double b = g > 0.0 ? g * hi_[j] : g * lo_[j];
        lo += a;
        hi += b;
        if (std::isfinite(a)) scale = std::max(scale, std::abs(a));
        if (std::isfinite(b)) scale = std::max(scale, std::abs(b));
    };
    for (int j = 0; j < n_; ++j) {
        double g = 0.0;
        for (const auto& [i, a] : cols_[j]) g -= tr[n_ + i] * a;
        add(g, j);
    }
    for (int i = 0; i < m_; ++i) add(tr[n_ + i], n_ + i);
    const double tol = 1e-9 * (1.0 + scale);
    return lo > tol || hi < -tol;
}

double DualSimplex::objective() const {
    double s = 0.0;
    for (int j = 0; j < n_; ++j) s += cost_[j] * value_of(j);
    return s;
}

}  // namespace genco::milp::detail
