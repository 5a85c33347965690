#pragma once

// Uniform-price clearing of an aggregated supply curve against inelastic
// demand, and the hourly horizontal displacement of the curve that stands in
// for the system operator's technical adjustments.

#include <array>
#include <span>
#include <vector>

#include "genco/curves.hpp"
#include "genco/error.hpp"
#include "genco/time.hpp"

namespace genco::market {

/// Demand exceeds everything offered.
class ScarcityError : public Error {
public:
    ScarcityError(double demand, double total_supply);
    double demand() const noexcept { return demand_; }
    double total_supply() const noexcept { return supply_; }

private:
    double demand_;
    double supply_;
};

struct InelasticDemand {
    double quantity = 0.0;  ///< MWh
    HourStamp hour{};
};

struct ClearingResult {
    double price = 0.0;       ///< marginal price, EUR/MWh
    double dispatched = 0.0;  ///< MWh, equals demand
    std::size_t marginal_block = 0;
    curves::Owner marginal_owner = curves::Owner::competitor;
    double genco_quantity = 0.0;
    double competitor_quantity = 0.0;
    std::vector<double> block_dispatch;  ///< per curve block
};

/// Linear scan: the first block whose cumulative quantity reaches demand is
/// marginal (a block that exactly completes demand sets the price).
ClearingResult clear(const curves::SteppedSupplyCurve& curve, double demand);
ClearingResult clear(const curves::SteppedSupplyCurve& curve, const InelasticDemand& demand);

/// Same result as `clear`, locating the marginal block by binary search.
ClearingResult clear_binary_search(const curves::SteppedSupplyCurve& curve, double demand);

/// Removes `shift` MWh from the cheap end of the curve (a negative shift adds
/// it to the first block). Prices are unchanged.
curves::SteppedSupplyCurve apply_displacement(const curves::SteppedSupplyCurve& curve, double shift);

/// Midpoint of the quantity range the step curve offers at exactly `price`
/// (everything strictly cheaper, plus half of what is offered at that price).
double quantity_at_price(const curves::SteppedSupplyCurve& curve, double price);

struct DisplacementObservation {
    HourStamp hour{};
    double offered_quantity = 0.0;   ///< offered curve evaluated at the realized price
    double realized_quantity = 0.0;  ///< energy actually matched
};

struct DisplacementProfile {
    std::array<double, 24> shift{};  ///< MWh by hour of day; positive = supply withdrawn
    int window_days = 0;
};

/// Mean of (offered - realized) per hour of day over the `window_days` days
/// strictly before `day`. Throws when an hour has no observation.
DisplacementProfile estimate_displacement(std::span<const DisplacementObservation> history, Day day,
                                          int window_days);

}  // namespace genco::market
