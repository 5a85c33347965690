#pragma once

// Step-wise supply curves and their optimal grouping into fewer blocks.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "genco/milp.hpp"
#include "genco/time.hpp"

namespace genco::curves {

enum class Owner { genco, competitor };

std::string_view to_string(Owner o) noexcept;
/// Accepts "genco" and "competitor"; throws InvalidArgument otherwise.
Owner parse_owner(std::string_view text);

struct OfferBlock {
    double price = 0.0;     ///< EUR/MWh
    double quantity = 0.0;  ///< MWh, strictly positive
    Owner owner = Owner::competitor;
    std::string unit_id;
    HourStamp hour{};
};

/// Blocks in ascending price order with their running quantity total.
class SteppedSupplyCurve {
public:
    SteppedSupplyCurve() = default;

    const std::vector<OfferBlock>& blocks() const noexcept { return blocks_; }
    const std::vector<double>& cumulative() const noexcept { return cumulative_; }
    std::size_t size() const noexcept { return blocks_.size(); }
    bool empty() const noexcept { return blocks_.empty(); }
    double total_quantity() const noexcept { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

    std::vector<double> prices() const;
    std::vector<double> quantities() const;

    /// Wraps blocks that are already price-ordered. Throws if they are not.
    static SteppedSupplyCurve from_sorted(std::vector<OfferBlock> blocks);

private:
    std::vector<OfferBlock> blocks_;
    std::vector<double> cumulative_;
};

/// Sorts offers by price (stable; genco blocks first among equal prices) and
/// accumulates quantities. Throws on empty input or non-positive quantities.
SteppedSupplyCurve build_curve(std::vector<OfferBlock> offers);

/// Merges several curves into one market curve, keeping owner attribution.
SteppedSupplyCurve aggregate(std::span<const SteppedSupplyCurve> curves);

struct DiscretizationResult {
    std::vector<std::size_t> group_end;  ///< exclusive end index of each group; last equals B
    std::vector<double> prices;          ///< one per group, non-decreasing
    std::vector<double> quantities;      ///< one per group
    double error = 0.0;                  ///< sum of |group price - block price| * block quantity
    bool proven_optimal = true;          ///< false when the MILP stopped on a limit

    std::size_t groups() const noexcept { return prices.size(); }
    std::size_t group_begin(std::size_t g) const noexcept { return g == 0 ? 0 : group_end[g - 1]; }
};

/// Lower quantity-weighted median of an ascending price run.
double weighted_median(std::span<const double> prices, std::span<const double> weights);

/// Exact grouping by branch and bound on the mixed-integer model below.
DiscretizationResult discretize(const SteppedSupplyCurve& curve, std::size_t groups,
                                const milp::SolveOptions& options = {});

/// The mixed-integer model used by `discretize`, exposed for inspection.
milp::ModelSpec build_discretization_model(const SteppedSupplyCurve& curve, std::size_t groups);

/// Exact grouping by dynamic programming over contiguous partitions.
DiscretizationResult discretize_dp_oracle(const SteppedSupplyCurve& curve, std::size_t groups);

/// Builds the result (median prices, quantities, error) for a given partition.
DiscretizationResult evaluate_partition(const SteppedSupplyCurve& curve, std::vector<std::size_t> group_end);

}  // namespace genco::curves
