#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "offering/internal.hpp"

namespace genco::offering {
namespace {

using Clock = std::chrono::steady_clock;
using detail::Layout;
using detail::Objective;

struct Sub {
    std::vector<double> P;  ///< offers of the solved hours, hour-major
    double objective = 0.0;
    double bound = 0.0;     ///< valid upper bound on the submodel optimum
    bool optimal = false;
    bool timed_out = false;
};

class Solver {
public:
    Solver(const OfferingProblem& p, const OptimizeOptions& o)
        : p_(p), o_(o), deadline_(Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                                      std::chrono::duration<double>(o.time_limit_seconds))) {}

    OfferingSolution full();
    OfferingSolution decomposed();

private:
    double remaining() const { return std::chrono::duration<double>(deadline_ - Clock::now()).count(); }
    milp::SolveOptions sub_options() const {
        milp::SolveOptions s;
        s.gap_tolerance = o_.gap_tolerance * 0.1;
        s.time_limit_seconds = std::max(0.0, remaining());
        return s;
    }
    Sub solve(const std::vector<int>& hours, const Objective& obj, const std::vector<double>* start);
    /// Profit of each hour and scenario under full-day offers.
    std::vector<double> hour_profits(const std::vector<double>& P) const;
    double value(const std::vector<double>& P) const;
    std::vector<double> day_profits(const std::vector<double>& P) const;
    /// Best responses hour by hour to fixed scenario weights; returns the sum
    /// of the hour bounds.
    double respond(const std::vector<double>& weight, std::vector<double>& P, bool& exact);
    void improve(std::vector<double>& P, double& F);

    const OfferingProblem& p_;
    const OptimizeOptions& o_;
    Clock::time_point deadline_;
    bool timed_out_ = false;
};

Sub Solver::solve(const std::vector<int>& hours, const Objective& obj, const std::vector<double>* start) {
    Layout L;
    const auto model = detail::build_model(p_, hours, obj, L);
    auto opt = sub_options();
    if (start) opt.initial_solution = detail::start_values(p_, L, *start, obj, model);
    const auto r = milp::solve(model, opt);
    Sub out;
    if (!r.has_solution()) {
        if (r.status == milp::Status::time_limit) throw Error("time limit reached before a feasible offer was found");
        throw Error("infeasible offering model: check flexibility and cost ladders");
    }
    for (int v : L.P) out.P.push_back(r.values[static_cast<std::size_t>(v)]);
    out.objective = r.objective;
    out.optimal = r.status == milp::Status::optimal;
    out.timed_out = r.status == milp::Status::time_limit;
    out.bound = std::max(r.best_bound, r.objective) + opt.gap_tolerance * std::max(1.0, std::abs(r.objective));
    if (out.timed_out) timed_out_ = true;
    return out;
}

std::vector<double> Solver::hour_profits(const std::vector<double>& P) const {
    const int T = p_.hours();
    const int W = p_.scenario_count();
    std::vector<double> out(static_cast<std::size_t>(T) * W);
    for (int t = 0; t < T; ++t)
        for (int w = 0; w < W; ++w)
            out[static_cast<std::size_t>(t) * W + w] =
                detail::hour_profit(p_, t, w, P.data() + static_cast<std::size_t>(t) * p_.blocks());
    return out;
}

std::vector<double> Solver::day_profits(const std::vector<double>& P) const {
    const auto hp = hour_profits(P);
    const int W = p_.scenario_count();
    std::vector<double> out(static_cast<std::size_t>(W), 0.0);
    for (std::size_t k = 0; k < hp.size(); ++k) out[k % static_cast<std::size_t>(W)] += hp[k];
    return out;
}

double Solver::value(const std::vector<double>& P) const {
    const auto prof = day_profits(P);
    const auto& pi = p_.scenarios.probability;
    const double e = std::inner_product(prof.begin(), prof.end(), pi.begin(), 0.0);
    return (1.0 - p_.chi) * e + (p_.chi > 0.0 ? p_.chi * cvar(prof, pi, p_.alpha) : 0.0);
}

double Solver::respond(const std::vector<double>& weight, std::vector<double>& P, bool& exact) {
    Objective obj;
    obj.weight = weight;
    double bound = 0.0;
    exact = true;
    for (int t = 0; t < p_.hours(); ++t) {
        const std::vector<double>* start = P.empty() ? nullptr : &P;
        const auto sub = solve({t}, obj, start);
        if (P.empty()) P.assign(static_cast<std::size_t>(p_.hours()) * p_.blocks(), 0.0);
        std::copy(sub.P.begin(), sub.P.end(), P.begin() + static_cast<long>(t) * p_.blocks());
        bound += sub.bound;
        exact = exact && sub.optimal;
    }
    return bound;
}

void Solver::improve(std::vector<double>& P, double& F) {
    const int W = p_.scenario_count();
    const int I = p_.blocks();
    for (int pass = 0; pass < o_.max_passes && remaining() > 0.0; ++pass) {
        bool moved = false;
        for (int t = 0; t < p_.hours() && remaining() > 0.0; ++t) {
            const auto hp = hour_profits(P);
            Objective obj;
            obj.with_cvar = true;
            obj.risk = p_.chi;
            obj.weight.resize(static_cast<std::size_t>(W));
            obj.offset.assign(static_cast<std::size_t>(W), 0.0);
            for (int w = 0; w < W; ++w) {
                obj.weight[static_cast<std::size_t>(w)] = (1.0 - p_.chi) * p_.scenarios.probability[static_cast<std::size_t>(w)];
                for (int h = 0; h < p_.hours(); ++h)
                    if (h != t) obj.offset[static_cast<std::size_t>(w)] += hp[static_cast<std::size_t>(h) * W + w];
            }
            const auto sub = solve({t}, obj, &P);
            auto trial = P;
            std::copy(sub.P.begin(), sub.P.end(), trial.begin() + static_cast<long>(t) * I);
            const double Ft = value(trial);
            if (Ft > F + 1e-9 * std::max(1.0, std::abs(F))) {
                P = std::move(trial);
                F = Ft;
                moved = true;
            }
        }
        if (!moved) break;
    }
}

OfferingSolution Solver::full() {
    Layout L;
    Objective obj;
    obj.with_cvar = true;
    obj.risk = p_.chi;
    for (double pi : p_.scenarios.probability) obj.weight.push_back((1.0 - p_.chi) * pi);
    std::vector<int> hours(static_cast<std::size_t>(p_.hours()));
    std::iota(hours.begin(), hours.end(), 0);
    const auto model = detail::build_model(p_, hours, obj, L);
    milp::SolveOptions opt;
    opt.gap_tolerance = o_.gap_tolerance;
    opt.time_limit_seconds = std::max(0.0, remaining());
    const auto r = milp::solve(model, opt);
    if (!r.has_solution()) {
        if (r.status == milp::Status::time_limit) throw Error("time limit reached before a feasible offer was found");
        throw Error("infeasible offering model: check flexibility and cost ladders");
    }
    std::vector<double> P;
    for (int v : L.P) P.push_back(r.values[static_cast<std::size_t>(v)]);
    auto sol = complete_offers(p_, std::move(P));
    sol.upper_bound = std::max(r.best_bound, sol.objective);
    sol.gap = (sol.upper_bound - sol.objective) / std::max(1.0, std::abs(sol.objective));
    sol.status = r.status;
    if (r.status == milp::Status::optimal) sol.gap = std::min(sol.gap, o_.gap_tolerance);
    sol.method = "full";
    return sol;
}

OfferingSolution Solver::decomposed() {
    const int W = p_.scenario_count();
    const auto& pi = p_.scenarios.probability;
    std::vector<double> P;
    bool exact = true;
    double best_bound = respond(pi, P, exact);
    double F = value(P);
    if (p_.chi == 0.0) {
        auto sol = complete_offers(p_, std::move(P));
        sol.upper_bound = std::max(best_bound, sol.objective);
        sol.gap = (sol.upper_bound - sol.objective) / std::max(1.0, std::abs(sol.objective));
        sol.status = timed_out_ ? milp::Status::time_limit : milp::Status::optimal;
        if (!exact && !timed_out_) sol.status = milp::Status::gap_limit;
        if (sol.status == milp::Status::optimal) sol.gap = std::min(sol.gap, o_.gap_tolerance);
        sol.method = "hourly";
        return sol;
    }

    // Risk-averse: improve hour by hour, then bound through the dual of the
    // tail constraints (scenario weights inside the CVaR envelope).
    best_bound = std::numeric_limits<double>::infinity();
    improve(P, F);
    std::vector<std::vector<double>> cuts{day_profits(P)};
    const double cap = p_.chi / p_.alpha;
    auto envelope = [&](const std::vector<double>& prof) {
        // tail weights q with q_w <= pi_w / alpha, sum 1, on the worst profits
        std::vector<std::size_t> order(static_cast<std::size_t>(W));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return prof[a] < prof[b]; });
        std::vector<double> mu(static_cast<std::size_t>(W), 0.0);
        double left = p_.chi;
        for (std::size_t k : order) {
            const double take = std::min(left, cap * pi[k]);
            mu[k] = take;
            left -= take;
            if (left <= 0.0) break;
        }
        return mu;
    };
    std::vector<double> mu = envelope(cuts.front());
    bool proven = false;
    for (int it = 0; it < o_.bound_iterations && remaining() > 0.0; ++it) {
        std::vector<double> weight(static_cast<std::size_t>(W));
        for (int w = 0; w < W; ++w)
            weight[static_cast<std::size_t>(w)] = (1.0 - p_.chi) * pi[static_cast<std::size_t>(w)] + mu[static_cast<std::size_t>(w)];
        std::vector<double> R = P;
        bool sub_exact = true;
        const double ub = respond(weight, R, sub_exact);
        if (timed_out_) break;
        best_bound = std::min(best_bound, ub);
        const double FR = value(R);
        if (FR > F + 1e-9 * std::max(1.0, std::abs(F))) {
            P = R;
            F = FR;
            improve(P, F);
        }
        if (best_bound - F <= o_.gap_tolerance * std::max(1.0, std::abs(F))) {
            proven = true;
            break;
        }
        cuts.push_back(day_profits(R));
        if (cuts.back() != day_profits(P)) cuts.push_back(day_profits(P));

        // master: min theta s.t. theta >= sum_w ((1-chi) pi_w + mu_w) phi_kw
        milp::ModelSpec master;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& c : cuts)
            for (double v : c) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        std::vector<int> m;
        for (int w = 0; w < W; ++w) m.push_back(master.add_variable(0.0, cap * pi[static_cast<std::size_t>(w)]));
        const int theta = master.add_variable(lo - 1.0, hi + 1.0);
        std::vector<milp::Term> simplex_row;
        for (int v : m) simplex_row.push_back({v, 1.0});
        master.add_constraint(simplex_row, milp::Cmp::eq, p_.chi);
        for (const auto& c : cuts) {
            std::vector<milp::Term> row{{theta, 1.0}};
            double rhs = 0.0;
            for (int w = 0; w < W; ++w) {
                row.push_back({m[static_cast<std::size_t>(w)], -c[static_cast<std::size_t>(w)]});
                rhs += (1.0 - p_.chi) * pi[static_cast<std::size_t>(w)] * c[static_cast<std::size_t>(w)];
            }
            master.add_constraint(std::move(row), milp::Cmp::ge, rhs);
        }
        master.set_objective({{theta, 1.0}}, milp::Sense::minimize);
        const auto rel = milp::solve_relaxation(master);
        if (!rel.feasible) break;
        if (rel.objective >= best_bound - o_.gap_tolerance * std::max(1.0, std::abs(F))) break;  // dual converged
        for (int w = 0; w < W; ++w) mu[static_cast<std::size_t>(w)] = std::max(0.0, rel.values[static_cast<std::size_t>(m[static_cast<std::size_t>(w)])]);
    }
    auto sol = complete_offers(p_, std::move(P));
    sol.upper_bound = std::isfinite(best_bound) ? std::max(best_bound, sol.objective) : sol.objective;
    sol.gap = std::isfinite(best_bound) ? (sol.upper_bound - sol.objective) / std::max(1.0, std::abs(sol.objective))
                                        : std::numeric_limits<double>::infinity();
    if (proven) {
        sol.status = milp::Status::optimal;
        sol.gap = std::min(sol.gap, o_.gap_tolerance);
    } else {
        sol.status = timed_out_ || remaining() <= 0.0 ? milp::Status::time_limit : milp::Status::gap_limit;
    }
    sol.method = "decomposition";
    return sol;
}

}  // namespace

double worst_tail_mean(std::vector<double> values, double alpha) {
    if (values.empty()) throw InvalidArgument("no values");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("tail fraction must lie in (0, 1]");
    std::sort(values.begin(), values.end());
    const auto k = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(values.size()) - 1e-9)));
    return std::accumulate(values.begin(), values.begin() + static_cast<long>(k), 0.0) / static_cast<double>(k);
}

double cvar(const std::vector<double>& values, const std::vector<double>& prob, double alpha) {
    if (values.empty() || values.size() != prob.size()) throw InvalidArgument("values and probabilities must match");
    const double eta = detail::optimal_eta(values, prob, alpha);
    double tail = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) tail += prob[k] * std::max(0.0, eta - values[k]);
    return eta - tail / alpha;
}

OfferingSolution complete_offers(const OfferingProblem& p, std::vector<double> P) {
    const int T = p.hours();
    const int W = p.scenario_count();
    const int I = p.blocks();
    if (P.size() != static_cast<std::size_t>(T) * I) throw InvalidArgument("offer vector has the wrong size");
    OfferingSolution s;
    s.hours = T;
    s.scenarios = W;
    s.blocks = I;
    s.P = std::move(P);
    s.u.assign(static_cast<std::size_t>(T) * W * I, 0);
    s.Q.assign(s.u.size(), 0.0);
    s.lambda.assign(static_cast<std::size_t>(T) * W, 0.0);
    s.profit.assign(static_cast<std::size_t>(W), 0.0);
    for (int t = 0; t < T; ++t) {
        const auto Tz = static_cast<std::size_t>(t);
        const double* Pt = s.P.data() + Tz * I;
        for (int w = 0; w < W; ++w) {
            const double lam = p.price(t, w, Pt);
            s.lambda[Tz * W + w] = lam;
            double v = lam * p.forecast.renewable[Tz];
            for (int i = 0; i < I; ++i) {
                const double c = p.forecast.cost[Tz][static_cast<std::size_t>(i)];
                if (!detail::dispatch(Pt[i], lam, c)) continue;
                const std::size_t k = (Tz * W + w) * I + i;
                s.u[k] = 1;
                s.Q[k] = p.forecast.quantity[Tz][static_cast<std::size_t>(i)];
                v += (lam - c) * s.Q[k];
            }
            s.profit[static_cast<std::size_t>(w)] += v;
        }
    }
    const auto& pi = p.scenarios.probability;
    s.expected_profit = std::inner_product(s.profit.begin(), s.profit.end(), pi.begin(), 0.0);
    s.eta = detail::optimal_eta(s.profit, pi, p.alpha);
    s.s.resize(static_cast<std::size_t>(W));
    double tail = 0.0;
    for (int w = 0; w < W; ++w) {
        s.s[static_cast<std::size_t>(w)] = std::max(0.0, s.eta - s.profit[static_cast<std::size_t>(w)]);
        tail += pi[static_cast<std::size_t>(w)] * s.s[static_cast<std::size_t>(w)];
    }
    s.cvar = s.eta - tail / p.alpha;
    s.objective = (1.0 - p.chi) * s.expected_profit + p.chi * s.cvar;
    s.upper_bound = s.objective;
    return s;
}

OfferingSolution optimize(const OfferingProblem& problem, const OptimizeOptions& options) {
    problem.validate();
    if (options.gap_tolerance < 0.0) throw InvalidArgument("gap tolerance must be non-negative");
    Solver solver(problem, options);
    Method m = options.method;
    if (m == Method::automatic) {
        const long binaries = static_cast<long>(problem.hours()) * problem.scenario_count() * problem.blocks();
        m = binaries <= options.full_model_binaries ? Method::full : Method::decomposition;
    }
    return m == Method::full ? solver.full() : solver.decomposed();
}

ProfitReport evaluate_solution(const OfferingSolution& s, const OfferingProblem& p, double tol) {
    p.validate();
    const int T = p.hours();
    const int W = p.scenario_count();
    const int I = p.blocks();
    if (s.hours != T || s.scenarios != W || s.blocks != I || s.P.size() != static_cast<std::size_t>(T) * I ||
        s.u.size() != static_cast<std::size_t>(T) * W * I || s.Q.size() != s.u.size() ||
        s.lambda.size() != static_cast<std::size_t>(T) * W || s.s.size() != static_cast<std::size_t>(W) ||
        s.profit.size() != static_cast<std::size_t>(W))
        throw InvalidArgument("solution dimensions do not match the problem");
    ProfitReport r;
    auto violate = [&](double amount, double scale, const std::string& what) {
        const double rel = amount / std::max(1.0, std::abs(scale));
        r.max_violation = std::max(r.max_violation, rel);
        if (rel > tol) throw InvalidArgument(fmt::format("invariant violated: {} (by {:.3g})", what, amount));
    };
    for (int t = 0; t < T; ++t) {
        const auto Tz = static_cast<std::size_t>(t);
        for (int i = 0; i < I; ++i) {
            const double P = s.offer(t, i);
            violate(p.lower_price(t, i) - P, P, fmt::format("P[{}][{}] = {} below its lower bound {}", t, i + 1, P, p.lower_price(t, i)));
            violate(P - p.upper_price(t, i), P, fmt::format("P[{}][{}] = {} above its upper bound {}", t, i + 1, P, p.upper_price(t, i)));
            if (i + 1 < I)
                violate(P - s.offer(t, i + 1), P, fmt::format("P[{}][{}] exceeds the next block's price", t, i + 1));
        }
        for (int w = 0; w < W; ++w) {
            const double lam = s.price(t, w);
            const double expect = p.price(t, w, s.P.data() + Tz * I);
            violate(std::abs(lam - expect), expect, fmt::format("lambda[{}][{}] = {} but the price response gives {}", t, w + 1, lam, expect));
            violate(p.price_floor - lam, lam, fmt::format("lambda[{}][{}] below the price floor", t, w + 1));
            violate(lam - p.big_m, lam, fmt::format("lambda[{}][{}] above the price cap", t, w + 1));
            for (int i = 0; i < I; ++i) {
                const std::size_t k = (Tz * W + w) * I + i;
                const double P = s.offer(t, i);
                const double qmax = p.forecast.quantity[Tz][static_cast<std::size_t>(i)];
                if (s.u[k]) {
                    violate(P - lam, lam, fmt::format("block {} dispatched at hour {} scenario {} although its price {} exceeds {}", i + 1, t, w + 1, P, lam));
                    violate(std::abs(s.Q[k] - qmax), qmax, fmt::format("Q[{}][{}][{}] differs from the block quantity", t, w + 1, i + 1));
                } else {
                    violate(lam - P, lam, fmt::format("block {} idle at hour {} scenario {} although its price {} is below {}", i + 1, t, w + 1, P, lam));
                    violate(std::abs(s.Q[k]), qmax, fmt::format("Q[{}][{}][{}] non-zero for an idle block", t, w + 1, i + 1));
                }
            }
        }
    }
    const auto& pi = p.scenarios.probability;
    r.profit.assign(static_cast<std::size_t>(W), 0.0);
    for (int t = 0; t < T; ++t) {
        const auto Tz = static_cast<std::size_t>(t);
        for (int w = 0; w < W; ++w) {
            const double lam = s.price(t, w);
            double v = lam * p.forecast.renewable[Tz];
            for (int i = 0; i < I; ++i)
                v += (lam - p.forecast.cost[Tz][static_cast<std::size_t>(i)]) * s.Q[(Tz * W + w) * I + i];
            r.profit[static_cast<std::size_t>(w)] += v;
        }
    }
    double tail = 0.0;
    for (int w = 0; w < W; ++w) {
        const auto Wz = static_cast<std::size_t>(w);
        violate(std::abs(r.profit[Wz] - s.profit[Wz]), r.profit[Wz], fmt::format("scenario {} profit differs from the recomputed value", w + 1));
        violate(std::max(0.0, s.eta - r.profit[Wz]) - s.s[Wz], r.profit[Wz], fmt::format("s[{}] below eta - profit", w + 1));
        violate(-s.s[Wz], r.profit[Wz], fmt::format("s[{}] negative", w + 1));
        tail += pi[Wz] * s.s[Wz];
    }
    r.expected = std::inner_product(r.profit.begin(), r.profit.end(), pi.begin(), 0.0);
    r.cvar = worst_tail_mean(r.profit, p.alpha);
    r.tail_mean = cvar(r.profit, pi, p.alpha);
    r.eta_identity = s.eta - tail / p.alpha;
    r.objective = (1.0 - p.chi) * r.expected + p.chi * r.tail_mean;
    violate(std::abs(r.expected - s.expected_profit), r.expected, "expected profit differs from the recomputed value");
    violate(std::abs(r.eta_identity - s.cvar), r.eta_identity, "reported CVaR differs from eta - (1/alpha) sum pi s");
    violate(std::abs((1.0 - p.chi) * r.expected + p.chi * r.eta_identity - s.objective), s.objective,
            "objective differs from its expected-profit and CVaR parts");
    return r;
}

std::vector<FrontierPoint> efficient_frontier(const OfferingProblem& problem, const std::vector<double>& grid,
                                              const OptimizeOptions& options) {
    if (grid.empty()) throw InvalidArgument("risk weight grid is empty");
    for (double chi : grid)
        if (!(chi >= 0.0 && chi <= 1.0)) throw InvalidArgument(fmt::format("risk weight {} outside [0, 1]", chi));
    std::vector<FrontierPoint> out;
    for (double chi : grid) {
        OfferingProblem p = problem;
        p.chi = chi == 0.0 ? 0.001 : chi == 1.0 ? 0.999 : chi;
        const auto s = optimize(p, options);
        FrontierPoint f;
        f.chi = chi;
        f.solved_chi = p.chi;
        f.expected_profit = s.expected_profit;
        f.cvar = s.cvar;
        f.objective = s.objective;
        f.status = s.status;
        out.push_back(f);
    }
    return out;
}

}  // namespace genco::offering
