#pragma once

// Hourly price regression: design-matrix construction from aligned hourly
// series, and a Gibbs sampler for the linear model with a normal prior on the
// coefficients and an inverse-gamma prior on the noise variance.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "genco/error.hpp"
#include "genco/time.hpp"

namespace genco::bayes {

inline constexpr std::array<int, 7> kLags{24, 48, 72, 96, 120, 144, 168};
inline constexpr int kHistoryHours = 168;

/// Aligned hourly series. `renewable` and `block_prices` describe the
/// producer's own offers (one price series per thermal block).
struct HourlySeries {
    std::vector<HourStamp> hours;
    std::vector<double> demand;
    std::vector<double> wind;
    std::vector<double> solar;
    std::vector<double> price;
    std::vector<char> holiday;
    std::vector<double> renewable;
    std::vector<std::vector<double>> block_prices;

    std::size_t size() const noexcept { return hours.size(); }
};

/// Predictor layout. Decision predictors (renewable quantity, then one price
/// per block) come first, followed by the covariates:
///   demand / wind / solar: forecast, 7 lags, trailing 24 h mean, max, min (11 each)
///   price: 7 lags
///   day of week (Monday dropped), month (January dropped), holiday flag.
struct FeatureSpec {
    int block_count = 6;

    std::size_t decision_count() const noexcept { return 1 + static_cast<std::size_t>(block_count); }
    std::size_t covariate_count() const noexcept { return 3 * 11 + 7 + 6 + 11 + 1; }
    std::size_t predictor_count() const noexcept { return decision_count() + covariate_count(); }
    /// Column names, intercept excluded.
    std::vector<std::string> names() const;
};

struct RegressionDataset {
    std::vector<std::string> columns;  ///< intercept excluded
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<HourStamp> hours;
    std::size_t decision_count = 0;

    std::size_t rows() const noexcept { return static_cast<std::size_t>(X.rows()); }
};

/// One row per hour with 168 h of history. Throws InvalidArgument on short
/// or misaligned series and on non-finite values.
RegressionDataset build_features(const HourlySeries& series, const FeatureSpec& spec = {});

/// Covariate part of the row for series index `t` (no decision predictors).
/// Valid for `t >= 168`; the price at `t` itself is not read.
Eigen::VectorXd covariate_row(const HourlySeries& series, std::size_t t);

/// Rows of `data` whose timestamps fall in [first, last).
RegressionDataset slice(const RegressionDataset& data, HourStamp first, HourStamp last);

struct GibbsOptions {
    int draws = 5000;  ///< total, burn-in included
    int burn_in = 1000;
    std::uint64_t seed = 20190601;
    double prior_variance = 1e4;  ///< standardized scale, prior mean 0
    double noise_shape = 2.0;
    double noise_scale = 1.0;
    bool keep_draws = true;
};

/// Posterior moments. Index 0 is the intercept. `mean`/`sd` are in natural
/// units, `std_mean`/`std_sd` on the standardized predictor scale.
struct PosteriorSummary {
    std::vector<std::string> names;
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;
    Eigen::VectorXd std_mean;
    Eigen::VectorXd std_sd;
    double noise_sd = 0.0;
    int draws = 0;
    int burn_in = 0;
    std::size_t decision_count = 0;
    Eigen::MatrixXd retained;  ///< natural-unit draws, one row per kept draw (may be empty)

    std::size_t predictors() const noexcept { return names.empty() ? 0 : names.size() - 1; }
    /// Position of a named coefficient (intercept is 0). Throws if absent.
    std::size_t index_of(const std::string& name) const;
};

/// Raised when the standardized design does not have full column rank.
class CollinearityError : public InvalidArgument {
public:
    CollinearityError(const std::string& what, std::vector<std::string> columns)
        : InvalidArgument(what), columns_(std::move(columns)) {}
    const std::vector<std::string>& columns() const noexcept { return columns_; }

private:
    std::vector<std::string> columns_;
};

PosteriorSummary fit_gibbs(const RegressionDataset& data, const GibbsOptions& options = {});

/// Intercept plus the dot product of posterior means with `row`.
double predict_mean(const PosteriorSummary& summary, const Eigen::Ref<const Eigen::VectorXd>& row);

struct FitMetrics {
    double mae = 0.0;
    double rmse = 0.0;
    std::vector<double> fold_mae;
    std::vector<double> fold_rmse;
};

FitMetrics evaluate(const PosteriorSummary& summary, const RegressionDataset& data);
/// Contiguous folds; each is scored by a fit on the remaining rows.
FitMetrics cross_validate(const RegressionDataset& data, int folds = 6, const GibbsOptions& options = {});

/// Percentage of standardized absolute coefficient mass on decision predictors.
double decision_share(const PosteriorSummary& summary);

/// `coefficient,mean,sd,std_mean,std_sd` rows, then a `noise_sd` row.
void write_summary_csv(std::ostream& out, const PosteriorSummary& summary);
PosteriorSummary read_summary_csv(std::istream& in);
/// Header of coefficient names, then one row per retained draw.
void write_draws_csv(std::ostream& out, const PosteriorSummary& summary);

}  // namespace genco::bayes
