#pragma once

// Out-of-sample replay: the producer's offers are merged with the recorded
// competitor curves, displaced, cleared against the recorded demand and
// compared with offering every block at cost.

#include <array>
#include <iosfwd>
#include <map>
#include <vector>

#include "genco/market.hpp"
#include "genco/offering.hpp"
#include "genco/scenarios.hpp"

namespace genco::backtest {

/// Recorded market of one hour.
struct HourMarket {
    curves::SteppedSupplyCurve competitors;  ///< discretized competitor offers
    double demand = 0.0;                     ///< MWh
};

struct MarketHistory {
    std::map<HourStamp, HourMarket> hours;
    std::vector<market::DisplacementObservation> observations;
};

/// Offered-versus-matched record of an hour from the full recorded curve.
market::DisplacementObservation observe(HourStamp hour, const curves::SteppedSupplyCurve& recorded,
                                        double realized_price, double realized_quantity);

struct HourResult {
    HourStamp hour{};
    double price = 0.0;
    double baseline_price = 0.0;
    double profit = 0.0;
    double baseline_profit = 0.0;
    double energy = 0.0;  ///< producer MWh dispatched under the strategy
    double increment() const { return profit - baseline_profit; }
};

struct DayResult {
    Day day{};
    std::vector<HourResult> hours;
    double profit = 0.0;
    double baseline_profit = 0.0;
    double mean_price = 0.0;
    double baseline_mean_price = 0.0;
    double increment() const { return profit - baseline_profit; }
};

/// Producer curve for one hour: renewable at zero plus one block per offer.
curves::SteppedSupplyCurve genco_curve(HourStamp hour, double renewable, const std::vector<double>& quantity,
                                       const std::vector<double>& price);

/// Clears one hour; profit counts dispatched producer energy at (price - cost).
HourResult run_hour(HourStamp hour, const std::vector<double>& offers, const std::vector<double>& baseline,
                    const scenarios::BlockSchedule& schedule, int t, const HourMarket& market, double shift);

/// `offers` is [hour][block]. Throws with hour context on scarcity or
/// missing market hours.
DayResult run_day(Day day, const std::vector<double>& offers, const scenarios::BlockSchedule& schedule,
                  const MarketHistory& history, const market::DisplacementProfile& displacement);
DayResult run_day(Day day, const offering::OfferingSolution& solution, const scenarios::BlockSchedule& schedule,
                  const MarketHistory& history, const market::DisplacementProfile& displacement);

struct DayPlan {
    Day day{};
    std::vector<double> offers;  ///< [hour][block]
    scenarios::BlockSchedule schedule;
};

struct Summary {
    double mean = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double variance = 0.0;  ///< sample variance, 0 for one value
};

/// Inclusive linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);
Summary summarize(const std::vector<double>& values);

struct BacktestReport {
    std::vector<DayResult> days;
    Summary profit;
    Summary baseline;
    Summary increment;
    double mean_price = 0.0;
    double baseline_mean_price = 0.0;
    int window_days = 0;
};

/// Replays each planned day with a displacement estimated from the
/// `window_days` days strictly before it.
BacktestReport run_period(const std::vector<DayPlan>& plans, const MarketHistory& history, int window_days = 60);

/// `day,profit,baseline_profit,increment,mean_price,baseline_mean_price`
void write_days_csv(std::ostream& out, const BacktestReport& r);
/// `timestamp,price,baseline_price,profit,baseline_profit,increment,energy`
void write_hours_csv(std::ostream& out, const BacktestReport& r);
/// `series,mean,q1,q3,variance,mean_price` for strategy, baseline and increment.
void write_summary_csv(std::ostream& out, const BacktestReport& r);
/// `hour,mean_increment` by hour of day.
void write_hour_profile_csv(std::ostream& out, const BacktestReport& r);

}  // namespace genco::backtest
