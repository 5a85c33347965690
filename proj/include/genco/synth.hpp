#pragma once

// Synthetic day-ahead market with a known data-generating process.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "genco/io.hpp"

namespace genco::app {

enum class PriceMode {
    clearing,  ///< realized price clears the displaced recorded curve
    linear,    ///< realized price is a known linear function plus noise
};

struct CostBand {
    std::string technology;
    double low = 0.0;       ///< EUR/MWh
    double high = 0.0;
    int units = 0;
    double capacity = 0.0;  ///< MWh per unit
};

struct GencoUnit {
    double cost = 0.0;
    double capacity = 0.0;
};

/// Price response used in linear mode.
struct LinearTruth {
    double intercept = 12.0;
    double renewable = -0.003;
    std::vector<double> blocks{0.05, 0.08, 0.10, 0.12, 0.06, 0.04};  ///< one per producer unit, by offer rank
    double demand = 0.0018;
    double wind = -0.0012;
    double solar = -0.0008;
    double noise_sd = 1.0;
};

struct SyntheticMarketSpec {
    Day start = parse_day("2018-06-01");
    int history_days = 365;
    int test_days = 30;
    std::vector<CostBand> technologies{
        {"nuclear", 5.0, 9.0, 4, 1000.0}, {"hydro", 20.0, 70.0, 5, 600.0}, {"coal", 28.0, 40.0, 4, 700.0},
        {"ccgt", 38.0, 55.0, 6, 800.0},   {"peaker", 60.0, 95.0, 4, 600.0},
    };
    std::vector<GencoUnit> genco{{20.0, 1200.0}, {28.0, 1000.0}, {36.0, 1000.0},
                                 {44.0, 900.0},  {52.0, 800.0},  {65.0, 600.0}};
    double genco_markup = 0.15;       ///< training offers are cost * U(1 - m, 1 + m)
    double genco_renewable = 2500.0;  ///< MWh capacity, offered at zero
    double wind_capacity = 6000.0;
    double solar_capacity = 3000.0;
    double solar_storage = 400.0;     ///< thermal-storage output, also at night
    double demand_base = 16000.0;
    double demand_daily = 0.18;       ///< relative amplitudes
    double demand_weekend = 0.08;
    double demand_seasonal = 0.06;
    double demand_holiday = 0.08;
    double demand_noise = 0.02;
    double offer_noise = 0.05;        ///< relative jitter of competitor offers
    double displacement_mean = 400.0; ///< MWh withdrawn, by hour of day
    double displacement_amplitude = 300.0;
    double displacement_noise = 100.0;
    PriceMode mode = PriceMode::clearing;
    LinearTruth truth;

    int competitor_units() const;
    /// Throws InvalidArgument on a degenerate specification.
    void validate() const;
    /// Lowest and highest price any offer can take.
    std::pair<double, double> price_envelope() const;
};

struct SyntheticMarket {
    std::vector<curves::OfferBlock> curves;
    std::vector<CovariateRecord> covariates;
    std::vector<std::pair<std::string, double>> truth;
    Day test_start{};
};

/// Deterministic for a given spec and seed.
SyntheticMarket generate_synthetic(const SyntheticMarketSpec& spec, std::uint64_t seed);

/// Writes curves.csv, covariates.csv and ground_truth.csv into `dir`.
void write_synthetic(const SyntheticMarket& market, const std::filesystem::path& dir);

}  // namespace genco::app
