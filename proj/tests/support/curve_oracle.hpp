#pragma once

// Reference computations for supply curves that avoid the library's own
// median and prefix-sum code: segment costs are minimised over every member
// price, and partitions are enumerated exhaustively.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "genco/curves.hpp"

namespace oracle {

/// min over c of sum q_k |c - p_k| on [a, b). An L1 optimum sits on a data point.
inline double segment_cost(const std::vector<double>& p, const std::vector<double>& q, std::size_t a, std::size_t b) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = a; c < b; ++c) {
        double s = 0.0;
        for (std::size_t k = a; k < b; ++k) s += q[k] * std::abs(p[c] - p[k]);
        best = std::min(best, s);
    }
    return best;
}

/// Exhaustive search over all contiguous partitions into `groups` groups.
inline double best_partition_cost(const genco::curves::SteppedSupplyCurve& curve, std::size_t groups) {
    const auto p = curve.prices();
    const auto q = curve.quantities();
    const std::size_t n = p.size();
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> ends;
    auto rec = [&](auto&& self, std::size_t begin, std::size_t left, double acc) -> void {
        if (acc >= best) return;
        if (left == 1) {
            best = std::min(best, acc + segment_cost(p, q, begin, n));
            return;
        }
        for (std::size_t end = begin + 1; end + left - 1 <= n; ++end)
            self(self, end, left - 1, acc + segment_cost(p, q, begin, end));
    };
    rec(rec, 0, groups, 0.0);
    return best;
}

/// Offers with prices on a 0.01 grid in [0, max_price] and quantities in [1, 500].
inline std::vector<genco::curves::OfferBlock> random_offers(std::mt19937_64& rng, std::size_t count,
                                                            double max_price = 180.0) {
    std::uniform_real_distribution<double> price(0.0, max_price);
    std::uniform_real_distribution<double> qty(1.0, 500.0);
    std::bernoulli_distribution genco(0.3);
    std::vector<genco::curves::OfferBlock> out;
    for (std::size_t k = 0; k < count; ++k) {
        genco::curves::OfferBlock b;
        b.price = std::round(price(rng) * 100.0) / 100.0;
        b.quantity = qty(rng);
        b.owner = genco(rng) ? genco::curves::Owner::genco : genco::curves::Owner::competitor;
        b.unit_id = "u" + std::to_string(k);
        out.push_back(b);
    }
    return out;
}

/// Random partition of n blocks into g non-empty contiguous groups.
inline std::vector<std::size_t> random_partition(std::mt19937_64& rng, std::size_t n, std::size_t g) {
    std::vector<std::size_t> cuts(n - 1);
    for (std::size_t k = 0; k < cuts.size(); ++k) cuts[k] = k + 1;
    std::shuffle(cuts.begin(), cuts.end(), rng);
    cuts.resize(g - 1);
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(n);
    return cuts;
}

}  // namespace oracle
