#pragma once

// End-to-end workflow: recorded offers and covariates -> discretized blocks ->
// price regression -> scenarios -> daily offers -> out-of-sample replay.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "genco/backtest.hpp"
#include "genco/bayes.hpp"
#include "genco/io.hpp"
#include "genco/offering.hpp"
#include "genco/scenarios.hpp"

namespace genco::app {

enum class Discretizer { dp, milp };

struct PipelineConfig {
    std::filesystem::path curves = "curves.csv";
    std::filesystem::path covariates = "covariates.csv";
    std::filesystem::path output = "out";
    int blocks = 7;              ///< producer blocks including the renewable one
    int competitor_blocks = 7;
    int scenarios = 200;
    std::uint64_t seed = 20190601;
    double chi = 0.0;
    double alpha = 0.10;
    double flexibility = 0.10;
    int rigid_blocks = 2;        ///< most expensive blocks kept at cost
    int window_days = 60;
    double price_cap = 180.3;
    /// Inclusive day ranges; empty means: the last `test_days` days are the
    /// test period and everything before it trains.
    std::string train_start, train_end, test_start, test_end;
    int test_days = 30;
    int draws = 5000;
    int burn_in = 1000;
    double gap = 1e-6;
    double time_limit = 1800.0;  ///< seconds per day
    Discretizer discretizer = Discretizer::dp;

    /// Throws InvalidArgument on inconsistent settings.
    void validate() const;
};

/// JSON object whose keys are the field names above. Unknown keys are errors.
PipelineConfig parse_config(const std::string& json_text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path);
std::string to_json(const PipelineConfig& config);

Discretizer parse_discretizer(const std::string& name);
curves::DiscretizationResult discretize_with(const curves::SteppedSupplyCurve& curve, std::size_t groups, Discretizer d);
/// Curve with one block per group (the curve itself when it is short enough).
curves::SteppedSupplyCurve grouped_curve(const curves::SteppedSupplyCurve& curve, std::size_t groups, Discretizer d);

/// Producer offers of one hour: zero-priced renewable energy and the
/// priced blocks grouped into `groups` steps.
struct GencoHour {
    double renewable = 0.0;
    std::vector<double> quantity;
    std::vector<double> price;
};
GencoHour genco_hour(const std::vector<curves::OfferBlock>& offers, int groups, Discretizer d);

struct MarketData {
    std::map<HourStamp, HourOffers> offers;
    std::vector<CovariateRecord> covariates;
};
MarketData load_market(const std::filesystem::path& curves, const std::filesystem::path& covariates);
MarketData make_market(std::span<const curves::OfferBlock> curves, std::vector<CovariateRecord> covariates);

/// Processed market: producer blocks per hour, regression series and the
/// replay history.
struct PreparedMarket {
    std::map<HourStamp, GencoHour> genco;
    bayes::HourlySeries series;
    backtest::MarketHistory history;
};
PreparedMarket prepare(const MarketData& data, int blocks, int competitor_blocks, Discretizer d);

/// Recorded producer offers of `day` taken as its true costs.
scenarios::BlockSchedule day_schedule(const PreparedMarket& m, Day day);

offering::OfferingProblem day_problem(const PreparedMarket& m, const bayes::PosteriorSummary& posterior,
                                      const scenarios::ScenarioSet& set, Day day, const PipelineConfig& c);

struct DayRange {
    Day first{};
    Day last{};  ///< inclusive
};
/// Training and test periods resolved against the covariate coverage.
std::pair<DayRange, DayRange> resolve_periods(const PipelineConfig& c, const MarketData& data);

struct DayOutcome {
    Day day{};
    offering::OfferingProblem problem;
    offering::OfferingSolution solution;
};

struct PipelineResult {
    bayes::PosteriorSummary posterior;
    bayes::FitMetrics metrics;
    scenarios::ScenarioSet scenario_set;
    std::vector<DayOutcome> days;
    backtest::BacktestReport report;
};

/// Runs every stage and writes the reports into `config.output`.
PipelineResult run_pipeline(const PipelineConfig& config, std::ostream* log = nullptr);

/// `day,hour,block,price` rows.
void write_day_offers_csv(std::ostream& out, const std::vector<DayOutcome>& days);
std::vector<backtest::DayPlan> read_day_offers_csv(std::istream& in, const PreparedMarket& m);

}  // namespace genco::app
