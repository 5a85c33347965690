#include "genco/market.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace genco::market {

using curves::Owner;
using curves::SteppedSupplyCurve;

ScarcityError::ScarcityError(double demand, double total_supply)
    : Error(fmt::format("demand {:.3f} MWh exceeds total supply {:.3f} MWh", demand, total_supply)),
      demand_(demand), supply_(total_supply) {}

namespace {

void check_inputs(const SteppedSupplyCurve& curve, double demand) {
    if (curve.empty()) throw InvalidArgument("cannot clear an empty supply curve");
    if (!(demand > 0.0) || !std::isfinite(demand)) throw InvalidArgument("demand must be positive and finite");
    if (demand > curve.total_quantity()) throw ScarcityError(demand, curve.total_quantity());
}

ClearingResult settle(const SteppedSupplyCurve& curve, double demand, std::size_t marginal) {
    const auto& blocks = curve.blocks();
    const auto& cum = curve.cumulative();
    ClearingResult r;
    r.price = blocks[marginal].price;
    r.dispatched = demand;
    r.marginal_block = marginal;
    r.marginal_owner = blocks[marginal].owner;
    r.block_dispatch.assign(blocks.size(), 0.0);
    for (std::size_t k = 0; k < marginal; ++k) r.block_dispatch[k] = blocks[k].quantity;
    const double before = marginal == 0 ? 0.0 : cum[marginal - 1];
    r.block_dispatch[marginal] = std::min(blocks[marginal].quantity, demand - before);
    for (std::size_t k = 0; k <= marginal; ++k)
        (blocks[k].owner == Owner::genco ? r.genco_quantity : r.competitor_quantity) += r.block_dispatch[k];
    return r;
}

}  // namespace

ClearingResult clear(const SteppedSupplyCurve& curve, double demand) {
    check_inputs(curve, demand);
    const auto& cum = curve.cumulative();
    std::size_t k = 0;
    while (cum[k] < demand) ++k;
    return settle(curve, demand, k);
}

ClearingResult clear(const SteppedSupplyCurve& curve, const InelasticDemand& demand) {
    return clear(curve, demand.quantity);
}

ClearingResult clear_binary_search(const SteppedSupplyCurve& curve, double demand) {
    check_inputs(curve, demand);
    const auto& cum = curve.cumulative();
    const auto it = std::lower_bound(cum.begin(), cum.end(), demand);
    return settle(curve, demand, static_cast<std::size_t>(it - cum.begin()));
}

SteppedSupplyCurve apply_displacement(const SteppedSupplyCurve& curve, double shift) {
    if (!std::isfinite(shift)) throw InvalidArgument("displacement must be finite");
    if (curve.empty()) throw InvalidArgument("cannot displace an empty curve");
    if (shift >= curve.total_quantity())
        throw InvalidArgument(fmt::format("displacement {:.3f} MWh removes the whole curve ({:.3f} MWh)", shift,
                                          curve.total_quantity()));
    std::vector<curves::OfferBlock> blocks = curve.blocks();
    if (shift < 0.0) {
        blocks.front().quantity -= shift;
        return SteppedSupplyCurve::from_sorted(std::move(blocks));
    }
    double left = shift;
    std::size_t first = 0;
    while (left > 0.0 && first < blocks.size()) {
        if (blocks[first].quantity <= left) {
            left -= blocks[first].quantity;
            ++first;
        } else {
            blocks[first].quantity -= left;
            left = 0.0;
        }
    }
    blocks.erase(blocks.begin(), blocks.begin() + static_cast<std::ptrdiff_t>(first));
    return SteppedSupplyCurve::from_sorted(std::move(blocks));
}

double quantity_at_price(const SteppedSupplyCurve& curve, double price) {
    double below = 0.0;
    double at = 0.0;
    for (const auto& b : curve.blocks()) {
        if (b.price < price) below += b.quantity;
        else if (b.price == price) at += b.quantity;
    }
    return below + 0.5 * at;
}

DisplacementProfile estimate_displacement(std::span<const DisplacementObservation> history, Day day,
                                          int window_days) {
    if (window_days <= 0) throw InvalidArgument("displacement window must be positive");
    const Day first = day - std::chrono::days{window_days};
    std::array<double, 24> sum{};
    std::array<int, 24> count{};
    for (const auto& obs : history) {
        const Day d = day_of(obs.hour);
        if (d < first || d >= day) continue;
        const int h = hour_of_day(obs.hour);
        sum[h] += obs.offered_quantity - obs.realized_quantity;
        ++count[h];
    }
    DisplacementProfile p;
    p.window_days = window_days;
    for (int h = 0; h < 24; ++h) {
        if (count[h] == 0)
            throw InvalidArgument(fmt::format("no displacement observations for hour {:02d} in the {} days before {}", h,
                                              window_days, format_day(day)));
        p.shift[h] = sum[h] / count[h];
    }
    return p;
}

}  // namespace genco::market
