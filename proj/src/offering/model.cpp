#include "offering/internal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace genco::offering {

void OfferingProblem::validate() const {
    const auto& f = forecast;
    f.validate();
    const auto& sc = scenarios;
    if (sc.scenarios <= 0) throw InvalidArgument("problem needs at least one scenario");
    if (sc.hours != f.hours || sc.blocks != f.blocks)
        throw InvalidArgument(fmt::format("scenario set is {} hours x {} blocks but the forecast is {} x {}", sc.hours,
                                          sc.blocks, f.hours, f.blocks));
    if (sc.coefficient.size() != static_cast<std::size_t>(sc.scenarios) * sc.hours * sc.blocks ||
        sc.probability.size() != static_cast<std::size_t>(sc.scenarios))
        throw InvalidArgument("scenario set storage does not match its dimensions");
    double total = 0.0;
    for (double pi : sc.probability) {
        if (!(pi > 0.0)) throw InvalidArgument("scenario probabilities must be positive");
        total += pi;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("scenario probabilities must sum to one");
    if (!(chi >= 0.0 && chi <= 1.0)) throw InvalidArgument("risk weight must lie in [0, 1]");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("CVaR tail fraction must lie in (0, 1)");
    if (!(big_m > price_floor) || !std::isfinite(big_m)) throw InvalidArgument("price cap must exceed the price floor");
    if (!(min_offer > 0.0)) throw InvalidArgument("minimum offer price must be positive");
    for (int t = 0; t < hours(); ++t)
        for (int i = 0; i < blocks(); ++i)
            if (upper_price(t, i) < lower_price(t, i))
                throw InvalidArgument(fmt::format("hour {} block {}: cost {} and flexibility {} leave no positive price",
                                                  t, i + 1, f.cost[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)],
                                                  f.flex[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)]));
}

double OfferingProblem::lower_price(int t, int i) const {
    const auto T = static_cast<std::size_t>(t);
    const auto I = static_cast<std::size_t>(i);
    return std::max(min_offer, forecast.cost[T][I] - forecast.flex[T][I]);
}

double OfferingProblem::upper_price(int t, int i) const {
    const auto T = static_cast<std::size_t>(t);
    const auto I = static_cast<std::size_t>(i);
    return std::min(big_m, forecast.cost[T][I] + forecast.flex[T][I]);
}

double OfferingProblem::price(int t, int w, const double* P) const {
    double v = detail::base_price(*this, t);
    for (int i = 0; i < blocks(); ++i) v += scenarios.beta(w, t, i) * P[i];
    return v;
}

namespace detail {

double base_price(const OfferingProblem& p, int t) {
    const auto T = static_cast<std::size_t>(t);
    return p.forecast.intercept + p.forecast.beta_renewable * p.forecast.renewable[T] + p.forecast.D[T];
}

std::pair<double, double> price_range(const OfferingProblem& p, int t, int w) {
    double lo = base_price(p, t);
    double hi = lo;
    for (int i = 0; i < p.blocks(); ++i) {
        const double b = p.scenarios.beta(w, t, i);
        const double a = b * p.lower_price(t, i);
        const double c = b * p.upper_price(t, i);
        lo += std::min(a, c);
        hi += std::max(a, c);
    }
    return {std::max(lo, p.price_floor), std::min(hi, p.big_m)};
}

milp::ModelSpec build_model(const OfferingProblem& p, const std::vector<int>& hours, const Objective& obj, Layout& L) {
    const int W = p.scenario_count();
    const int I = p.blocks();
    const auto H = hours.size();
    const double M = p.big_m;
    milp::ModelSpec m;
    L = Layout{};
    L.hours = hours;

    for (int t : hours)
        for (int i = 0; i < I; ++i)
            L.P.push_back(m.add_variable(p.lower_price(t, i), p.upper_price(t, i), milp::VarKind::continuous,
                                         fmt::format("P_t{}_b{}", t, i + 1)));

    std::vector<std::vector<milp::Term>> profit(static_cast<std::size_t>(W));
    double profit_lo = 0.0;
    double profit_hi = 0.0;
    for (std::size_t h = 0; h < H; ++h) {
        const int t = hours[h];
        const auto T = static_cast<std::size_t>(t);
        const double qren = p.forecast.renewable[T];
        double hour_lo = qren * p.price_floor;
        double hour_hi = qren * M;
        for (int i = 0; i < I; ++i) {
            const auto q = p.forecast.quantity[T][static_cast<std::size_t>(i)];
            hour_lo -= std::max(0.0, p.forecast.cost[T][static_cast<std::size_t>(i)] - p.price_floor) * q;
            hour_hi += M * q;
        }
        profit_lo += hour_lo;
        profit_hi += hour_hi;
        for (int w = 0; w < W; ++w) {
            auto [lo, hi] = price_range(p, t, w);
            if (lo > hi)
                throw Error(fmt::format("infeasible: hour {} scenario {} price response leaves [{}, {}]", t, w + 1,
                                        p.price_floor, M));
            const int lam = m.add_variable(lo, hi, milp::VarKind::continuous, fmt::format("lambda_t{}_w{}", t, w + 1));
            L.lambda.push_back(lam);
            // lambda - sum_i beta P = beta0 + beta_ren Qren + D
            std::vector<milp::Term> f{{lam, 1.0}};
            for (int i = 0; i < I; ++i)
                f.push_back({L.P[h * static_cast<std::size_t>(I) + static_cast<std::size_t>(i)], -p.scenarios.beta(w, t, i)});
            m.add_constraint(std::move(f), milp::Cmp::eq, base_price(p, t), fmt::format("price_t{}_w{}", t, w + 1));
            auto& pr = profit[static_cast<std::size_t>(w)];
            if (qren != 0.0) pr.push_back({lam, qren});
            for (int i = 0; i < I; ++i) {
                const int P = L.P[h * static_cast<std::size_t>(I) + static_cast<std::size_t>(i)];
                const double qmax = p.forecast.quantity[T][static_cast<std::size_t>(i)];
                const double cost = p.forecast.cost[T][static_cast<std::size_t>(i)];
                const auto tag = fmt::format("t{}_w{}_b{}", t, w + 1, i + 1);
                const int u = m.add_binary("u_" + tag);
                const int z = m.add_variable(0.0, M, milp::VarKind::continuous, "z_" + tag);
                const int Q = m.add_variable(0.0, qmax, milp::VarKind::continuous, "Q_" + tag);
                L.u.push_back(u);
                L.z.push_back(z);
                L.Q.push_back(Q);
                m.add_constraint({{lam, 1.0}, {P, -1.0}, {u, -M}}, milp::Cmp::le, 0.0, "above_" + tag);
                m.add_constraint({{P, 1.0}, {lam, -1.0}, {u, M}}, milp::Cmp::le, M, "below_" + tag);
                m.add_constraint({{Q, 1.0}, {u, -qmax}}, milp::Cmp::eq, 0.0, "qty_" + tag);
                m.add_constraint({{z, 1.0}, {u, -M}}, milp::Cmp::le, 0.0, "zu_" + tag);
                m.add_constraint({{z, 1.0}, {lam, -1.0}}, milp::Cmp::le, 0.0, "zl_" + tag);
                m.add_constraint({{z, 1.0}, {lam, -1.0}, {u, -M}}, milp::Cmp::ge, -M, "zm_" + tag);
                if (qmax != 0.0) pr.push_back({z, qmax});
                if (cost != 0.0) pr.push_back({Q, -cost});
            }
        }
        for (int i = 0; i + 1 < I; ++i)
            m.add_constraint({{L.P[h * static_cast<std::size_t>(I) + static_cast<std::size_t>(i)], 1.0},
                              {L.P[h * static_cast<std::size_t>(I) + static_cast<std::size_t>(i) + 1], -1.0}},
                             milp::Cmp::le, 0.0, fmt::format("order_t{}_b{}", t, i + 1));
    }

    std::vector<milp::Term> objective;
    for (int w = 0; w < W; ++w) {
        const double a = obj.weight[static_cast<std::size_t>(w)];
        if (a == 0.0) continue;
        for (const auto& term : profit[static_cast<std::size_t>(w)]) objective.push_back({term.var, a * term.coef});
    }
    if (obj.with_cvar) {
        double rlo = 0.0;
        double rhi = 0.0;
        if (!obj.offset.empty()) {
            rlo = *std::min_element(obj.offset.begin(), obj.offset.end());
            rhi = *std::max_element(obj.offset.begin(), obj.offset.end());
        }
        const double eta_lo = profit_lo + rlo;
        const double eta_hi = profit_hi + rhi;
        L.eta = m.add_variable(eta_lo, eta_hi, milp::VarKind::continuous, "eta");
        if (obj.risk != 0.0) objective.push_back({L.eta, obj.risk});
        for (int w = 0; w < W; ++w) {
            const double pi = p.scenarios.probability[static_cast<std::size_t>(w)];
            const int s = m.add_variable(0.0, eta_hi - eta_lo, milp::VarKind::continuous, fmt::format("s_w{}", w + 1));
            L.s.push_back(s);
            if (obj.risk != 0.0) objective.push_back({s, -obj.risk * pi / p.alpha});
            // eta - profit_w - s_w <= offset_w
            std::vector<milp::Term> row{{L.eta, 1.0}, {s, -1.0}};
            for (const auto& term : profit[static_cast<std::size_t>(w)]) row.push_back({term.var, -term.coef});
            m.add_constraint(std::move(row), milp::Cmp::le, obj.offset.empty() ? 0.0 : obj.offset[static_cast<std::size_t>(w)],
                             fmt::format("tail_w{}", w + 1));
        }
    }
    m.set_objective(std::move(objective), milp::Sense::maximize);
    return m;
}

bool dispatch(double P, double lambda, double cost) {
    const double tie = kTie * std::max(1.0, std::abs(lambda));
    if (P < lambda - tie) return true;
    if (P > lambda + tie) return false;
    return lambda >= cost;
}

double hour_profit(const OfferingProblem& p, int t, int w, const double* P) {
    const auto T = static_cast<std::size_t>(t);
    const double lam = p.price(t, w, P);
    double v = lam * p.forecast.renewable[T];
    for (int i = 0; i < p.blocks(); ++i) {
        const double c = p.forecast.cost[T][static_cast<std::size_t>(i)];
        if (dispatch(P[i], lam, c)) v += (lam - c) * p.forecast.quantity[T][static_cast<std::size_t>(i)];
    }
    return v;
}

double optimal_eta(const std::vector<double>& values, const std::vector<double>& prob, double alpha) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    double cum = 0.0;
    for (std::size_t k : order) {
        cum += prob[k];
        if (cum >= alpha - 1e-12) return values[k];
    }
    return values[order.back()];
}

std::vector<double> start_values(const OfferingProblem& p, const Layout& L, const std::vector<double>& P,
                                 const Objective& obj, const milp::ModelSpec& model) {
    const int W = p.scenario_count();
    const int I = p.blocks();
    std::vector<double> x(model.num_variables(), 0.0);
    std::vector<double> total(static_cast<std::size_t>(W), 0.0);
    for (std::size_t h = 0; h < L.hours.size(); ++h) {
        const int t = L.hours[h];
        const auto T = static_cast<std::size_t>(t);
        const double* Pt = P.data() + static_cast<std::size_t>(t) * I;
        for (int i = 0; i < I; ++i) x[static_cast<std::size_t>(L.P[h * I + i])] = Pt[i];
        for (int w = 0; w < W; ++w) {
            const double lam = p.price(t, w, Pt);
            const std::size_t hw = h * static_cast<std::size_t>(W) + static_cast<std::size_t>(w);
            x[static_cast<std::size_t>(L.lambda[hw])] = lam;
            total[static_cast<std::size_t>(w)] += hour_profit(p, t, w, Pt);
            for (int i = 0; i < I; ++i) {
                const std::size_t k = hw * static_cast<std::size_t>(I) + static_cast<std::size_t>(i);
                const bool on = dispatch(Pt[i], lam, p.forecast.cost[T][static_cast<std::size_t>(i)]);
                x[static_cast<std::size_t>(L.u[k])] = on ? 1.0 : 0.0;
                x[static_cast<std::size_t>(L.z[k])] = on ? lam : 0.0;
                x[static_cast<std::size_t>(L.Q[k])] = on ? p.forecast.quantity[T][static_cast<std::size_t>(i)] : 0.0;
            }
        }
    }
    if (L.eta >= 0) {
        for (int w = 0; w < W; ++w)
            if (!obj.offset.empty()) total[static_cast<std::size_t>(w)] += obj.offset[static_cast<std::size_t>(w)];
        const double eta = optimal_eta(total, p.scenarios.probability, p.alpha);
        x[static_cast<std::size_t>(L.eta)] = eta;
        for (int w = 0; w < W; ++w)
            x[static_cast<std::size_t>(L.s[static_cast<std::size_t>(w)])] = std::max(0.0, eta - total[static_cast<std::size_t>(w)]);
    }
    return x;
}

}  // namespace detail

milp::ModelSpec build_milp(const OfferingProblem& problem) {
    problem.validate();
    detail::Objective obj;
    obj.weight.resize(static_cast<std::size_t>(problem.scenario_count()));
    for (int w = 0; w < problem.scenario_count(); ++w)
        obj.weight[static_cast<std::size_t>(w)] = (1.0 - problem.chi) * problem.scenarios.probability[static_cast<std::size_t>(w)];
    obj.risk = problem.chi;
    obj.with_cvar = true;
    std::vector<int> hours(static_cast<std::size_t>(problem.hours()));
    std::iota(hours.begin(), hours.end(), 0);
    detail::Layout L;
    return detail::build_model(problem, hours, obj, L);
}

}  // namespace genco::offering
