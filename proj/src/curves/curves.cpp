#include "genco/curves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "genco/error.hpp"

namespace genco::curves {

std::string_view to_string(Owner o) noexcept { return o == Owner::genco ? "genco" : "competitor"; }

Owner parse_owner(std::string_view text) {
    if (text == "genco") return Owner::genco;
    if (text == "competitor") return Owner::competitor;
    throw InvalidArgument("unknown owner '" + std::string(text) + "'");
}

std::vector<double> SteppedSupplyCurve::prices() const {
    std::vector<double> out;
    out.reserve(blocks_.size());
    for (const auto& b : blocks_) out.push_back(b.price);
    return out;
}

std::vector<double> SteppedSupplyCurve::quantities() const {
    std::vector<double> out;
    out.reserve(blocks_.size());
    for (const auto& b : blocks_) out.push_back(b.quantity);
    return out;
}

SteppedSupplyCurve SteppedSupplyCurve::from_sorted(std::vector<OfferBlock> blocks) {
    SteppedSupplyCurve c;
    double run = 0.0;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const auto& b = blocks[k];
        if (!(b.quantity > 0.0) || !std::isfinite(b.quantity))
            throw InvalidArgument("offer quantity must be positive and finite (unit '" + b.unit_id + "')");
        if (!(b.price >= 0.0) || !std::isfinite(b.price))
            throw InvalidArgument("offer price must be non-negative and finite (unit '" + b.unit_id + "')");
        if (k > 0 && b.price < blocks[k - 1].price) throw InvalidArgument("blocks are not in ascending price order");
        run += b.quantity;
        c.cumulative_.push_back(run);
    }
    c.blocks_ = std::move(blocks);
    return c;
}

SteppedSupplyCurve build_curve(std::vector<OfferBlock> offers) {
    if (offers.empty()) throw InvalidArgument("cannot build a supply curve from no offers");
    std::stable_sort(offers.begin(), offers.end(), [](const OfferBlock& a, const OfferBlock& b) {
        if (a.price != b.price) return a.price < b.price;
        return a.owner == Owner::genco && b.owner != Owner::genco;
    });
    return SteppedSupplyCurve::from_sorted(std::move(offers));
}

SteppedSupplyCurve aggregate(std::span<const SteppedSupplyCurve> curves) {
    if (curves.empty()) throw InvalidArgument("cannot aggregate an empty list of curves");
    std::vector<OfferBlock> all;
    for (const auto& c : curves) all.insert(all.end(), c.blocks().begin(), c.blocks().end());
    return build_curve(std::move(all));
}

double weighted_median(std::span<const double> prices, std::span<const double> weights) {
    if (prices.empty() || prices.size() != weights.size())
        throw InvalidArgument("weighted median needs matching non-empty inputs");
    double total = 0.0;
    for (double w : weights) total += w;
    double run = 0.0;
    for (std::size_t k = 0; k < prices.size(); ++k) {
        run += weights[k];
        if (run >= 0.5 * total) return prices[k];
    }
    return prices.back();
}

DiscretizationResult evaluate_partition(const SteppedSupplyCurve& curve, std::vector<std::size_t> group_end) {
    const auto prices = curve.prices();
    const auto qty = curve.quantities();
    if (group_end.empty() || group_end.back() != prices.size())
        throw InvalidArgument("partition must end at the last block");
    DiscretizationResult r;
    std::size_t begin = 0;
    for (std::size_t end : group_end) {
        if (end <= begin) throw InvalidArgument("partition groups must be non-empty and ordered");
        const std::span<const double> p(prices.data() + begin, end - begin);
        const std::span<const double> w(qty.data() + begin, end - begin);
        const double c = weighted_median(p, w);
        double q = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
            q += qty[k];
            r.error += std::abs(c - prices[k]) * qty[k];
        }
        r.prices.push_back(c);
        r.quantities.push_back(q);
        begin = end;
    }
    r.group_end = std::move(group_end);
    return r;
}

namespace {

void check_groups(const SteppedSupplyCurve& curve, std::size_t groups) {
    if (curve.empty()) throw InvalidArgument("cannot discretize an empty curve");
    if (groups == 0) throw InvalidArgument("number of groups must be at least 1");
    if (groups > curve.size())
        throw InvalidArgument("requested " + std::to_string(groups) + " groups from a curve of " +
                              std::to_string(curve.size()) + " blocks");
}

// Cost of one group [a, b) priced at its weighted median, in O(log B) via
// prefix sums over the (already sorted) prices.
class SegmentCost {
public:
    explicit SegmentCost(const SteppedSupplyCurve& curve) : p_(curve.prices()) {
        const auto q = curve.quantities();
        w_.assign(p_.size() + 1, 0.0);
        wp_.assign(p_.size() + 1, 0.0);
        for (std::size_t k = 0; k < p_.size(); ++k) {
            w_[k + 1] = w_[k] + q[k];
            wp_[k + 1] = wp_[k] + q[k] * p_[k];
        }
    }

    double operator()(std::size_t a, std::size_t b) const {
        const double half = w_[a] + 0.5 * (w_[b] - w_[a]);
        // first m in [a, b) whose running weight reaches half the group weight
        const auto it = std::lower_bound(w_.begin() + static_cast<std::ptrdiff_t>(a) + 1,
                                         w_.begin() + static_cast<std::ptrdiff_t>(b) + 1, half);
        const std::size_t m = static_cast<std::size_t>(it - w_.begin()) - 1;
        const double c = p_[m];
        const double left = c * (w_[m + 1] - w_[a]) - (wp_[m + 1] - wp_[a]);
        const double right = (wp_[b] - wp_[m + 1]) - c * (w_[b] - w_[m + 1]);
        return std::max(0.0, left) + std::max(0.0, right);
    }

private:
    std::vector<double> p_;
    std::vector<double> w_;
    std::vector<double> wp_;
};

struct ModelLayout {
    int c0 = 0;
    std::size_t blocks = 0;
    int c(std::size_t b) const { return c0 + 1 + static_cast<int>(b); }
    int delta(std::size_t b) const { return c0 + 1 + static_cast<int>(blocks + b); }
    int err(std::size_t b) const { return c0 + 1 + static_cast<int>(2 * blocks + b); }
};

}  // namespace

milp::ModelSpec build_discretization_model(const SteppedSupplyCurve& curve, std::size_t groups) {
    check_groups(curve, groups);
    using milp::Cmp;
    const auto p = curve.prices();
    const auto q = curve.quantities();
    const std::size_t n = p.size();
    const double lo = p.front();
    const double hi = p.back();
    const double big_m = hi - lo;

    milp::ModelSpec m;
    ModelLayout L{0, n};
    m.add_variable(lo, hi, milp::VarKind::continuous, "C_0");
    for (std::size_t b = 0; b < n; ++b) m.add_variable(lo, hi, milp::VarKind::continuous, "C_" + std::to_string(b + 1));
    for (std::size_t b = 0; b < n; ++b) {
        // the first block never opens a cut; C_0 is a free anchor
        m.add_variable(0.0, b == 0 ? 0.0 : 1.0, milp::VarKind::binary, "delta_" + std::to_string(b + 1));
    }
    for (std::size_t b = 0; b < n; ++b) m.add_variable(0.0, big_m, milp::VarKind::continuous, "e_" + std::to_string(b + 1));

    for (std::size_t b = 0; b < n; ++b) {
        const int prev = b == 0 ? L.c0 : L.c(b - 1);
        const std::string tag = std::to_string(b + 1);
        m.add_constraint({{L.c(b), 1.0}, {prev, -1.0}}, Cmp::ge, 0.0, "step_lo_" + tag);
        m.add_constraint({{L.c(b), 1.0}, {prev, -1.0}, {L.delta(b), -big_m}}, Cmp::le, 0.0, "step_hi_" + tag);
        m.add_constraint({{L.err(b), 1.0}, {L.c(b), -1.0}}, Cmp::ge, -p[b], "abs_pos_" + tag);
        m.add_constraint({{L.err(b), 1.0}, {L.c(b), 1.0}}, Cmp::ge, p[b], "abs_neg_" + tag);
    }
    std::vector<milp::Term> cuts;
    for (std::size_t b = 0; b < n; ++b) cuts.push_back({L.delta(b), 1.0});
    m.add_constraint(std::move(cuts), Cmp::eq, static_cast<double>(groups - 1), "cuts");

    std::vector<milp::Term> obj;
    for (std::size_t b = 0; b < n; ++b) obj.push_back({L.err(b), q[b]});
    m.set_objective(std::move(obj), milp::Sense::minimize);
    return m;
}

DiscretizationResult discretize(const SteppedSupplyCurve& curve, std::size_t groups,
                                const milp::SolveOptions& options) {
    milp::ModelSpec model = build_discretization_model(curve, groups);
    const std::size_t n = curve.size();
    const ModelLayout L{0, n};

    const auto sol = milp::solve(model, options);
    if (!sol.has_solution())
        throw Error(std::string("discretization model has no solution: ") + std::string(milp::to_string(sol.status)));

    std::vector<std::size_t> ends;
    for (std::size_t b = 1; b < n; ++b)
        if (sol.values[static_cast<std::size_t>(L.delta(b))] > 0.5) ends.push_back(b);
    ends.push_back(n);
    auto r = evaluate_partition(curve, std::move(ends));
    r.proven_optimal = sol.status == milp::Status::optimal;
    return r;
}

DiscretizationResult discretize_dp_oracle(const SteppedSupplyCurve& curve, std::size_t groups) {
    check_groups(curve, groups);
    const std::size_t n = curve.size();
    const SegmentCost cost(curve);
    constexpr double inf = std::numeric_limits<double>::infinity();
    // best[g][e]: minimal cost of covering blocks [0, e) with g groups
    std::vector<std::vector<double>> best(groups + 1, std::vector<double>(n + 1, inf));
    std::vector<std::vector<std::size_t>> arg(groups + 1, std::vector<std::size_t>(n + 1, 0));
    best[0][0] = 0.0;
    for (std::size_t g = 1; g <= groups; ++g) {
        for (std::size_t e = g; e <= n; ++e) {
            for (std::size_t s = g - 1; s < e; ++s) {
                if (best[g - 1][s] == inf) continue;
                const double v = best[g - 1][s] + cost(s, e);
                if (v < best[g][e]) {
                    best[g][e] = v;
                    arg[g][e] = s;
                }
            }
        }
    }
    std::vector<std::size_t> ends(groups);
    std::size_t e = n;
    for (std::size_t g = groups; g >= 1; --g) {
        ends[g - 1] = e;
        e = arg[g][e];
    }
    return evaluate_partition(curve, std::move(ends));
}

}  // namespace genco::curves
