#pragma once

// Scenario sets of block-price coefficients drawn from the regression
// posterior, and the deterministic per-hour terms of the offering problem.

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "genco/bayes.hpp"

namespace genco::scenarios {

enum class Sampling {
    independent,  ///< each coefficient from its marginal normal
    joint,        ///< whole retained posterior draws, keeping correlations
};

struct ScenarioOptions {
    int hours = 24;
    bool per_hour = false;  ///< redraw for every hour instead of once per scenario
    Sampling sampling = Sampling::independent;
};

struct ScenarioSet {
    int scenarios = 0;
    int hours = 0;
    int blocks = 0;
    std::vector<double> coefficient;   ///< [scenario][hour][block], natural units
    std::vector<double> probability;   ///< per scenario
    std::uint64_t seed = 0;

    double beta(int w, int t, int i) const {
        return coefficient[(static_cast<std::size_t>(w) * hours + static_cast<std::size_t>(t)) * blocks +
                           static_cast<std::size_t>(i)];
    }
    double& beta(int w, int t, int i) {
        return coefficient[(static_cast<std::size_t>(w) * hours + static_cast<std::size_t>(t)) * blocks +
                           static_cast<std::size_t>(i)];
    }
};

/// Coefficients of `block_price_1..K` from the posterior. Throws on `count <= 0`.
ScenarioSet generate(const bayes::PosteriorSummary& posterior, int count, std::uint64_t seed,
                     const ScenarioOptions& options = {});

/// Producer blocks for each hour of the target day.
struct BlockSchedule {
    std::vector<double> renewable;              ///< [hour] MWh offered at zero price
    std::vector<std::vector<double>> quantity;  ///< [hour][block] MWh
    std::vector<std::vector<double>> cost;      ///< [hour][block] EUR/MWh, non-decreasing in block
};

struct ExogenousForecast {
    int hours = 0;
    int blocks = 0;
    double intercept = 0.0;
    double beta_renewable = 0.0;
    std::vector<double> D;                      ///< [hour] covariate contribution, EUR/MWh
    std::vector<double> renewable;              ///< [hour]
    std::vector<std::vector<double>> quantity;  ///< [hour][block]
    std::vector<std::vector<double>> cost;      ///< [hour][block]
    std::vector<std::vector<double>> flex;      ///< [hour][block] allowed price deviation

    /// Throws InvalidArgument when a documented invariant fails.
    void validate() const;
};

/// `covariates` holds one covariate row (see bayes::covariate_row) per hour.
/// Flexibility is `fraction * cost` except for the `rigid_tail` most
/// expensive blocks, which keep zero flexibility.
ExogenousForecast compute_exogenous(const bayes::PosteriorSummary& posterior, const Eigen::MatrixXd& covariates,
                                    const BlockSchedule& schedule, double fraction, int rigid_tail = 2);

/// Covariate rows for the 24 hours of `day`. Throws naming the first missing hour.
Eigen::MatrixXd day_covariates(const bayes::HourlySeries& series, Day day);

/// `scenario,block,hour,coefficient` rows (1-based block and scenario, hour 0..23).
void write_csv(std::ostream& out, const ScenarioSet& set);
ScenarioSet read_csv(std::istream& in);

}  // namespace genco::scenarios
