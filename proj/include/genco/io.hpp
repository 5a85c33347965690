#pragma once

// Market data files.
//   curves:     timestamp,owner,unit_id,price_eur_mwh,quantity_mwh
//   covariates: timestamp,demand_forecast,wind_forecast,solar_forecast,realized_price,is_holiday

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "genco/curves.hpp"

namespace genco::app {

struct CovariateRecord {
    HourStamp hour{};
    double demand_forecast = 0.0;
    double wind_forecast = 0.0;
    double solar_forecast = 0.0;
    double realized_price = 0.0;
    bool holiday = false;
};

/// Offer rows in file order. Timestamps must be non-decreasing. Throws
/// ParseError with the line number on any schema violation.
std::vector<curves::OfferBlock> read_curves(std::istream& in);
void write_curves(std::ostream& out, std::span<const curves::OfferBlock> blocks);

/// One row per hour, strictly increasing timestamps.
std::vector<CovariateRecord> read_covariates(std::istream& in);
void write_covariates(std::ostream& out, std::span<const CovariateRecord> rows);

std::vector<curves::OfferBlock> read_curves_file(const std::filesystem::path& path);
std::vector<CovariateRecord> read_covariates_file(const std::filesystem::path& path);

/// Offers grouped by hour, split by owner.
struct HourOffers {
    std::vector<curves::OfferBlock> genco;
    std::vector<curves::OfferBlock> competitors;
};
std::map<HourStamp, HourOffers> group_by_hour(std::span<const curves::OfferBlock> blocks);

}  // namespace genco::app
