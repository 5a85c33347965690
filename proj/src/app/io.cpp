#include "genco/io.hpp"

#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "core/csv.hpp"

namespace genco::app {

namespace {

HourStamp hour_at(std::string_view text, long line) {
    try {
        return parse_hour(text);
    } catch (const ParseError& e) {
        throw ParseError(e.what(), line);
    }
}

std::ifstream open(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return in;
}

}  // namespace

std::vector<curves::OfferBlock> read_curves(std::istream& in) {
    csv::Reader r(in, {"timestamp", "owner", "unit_id", "price_eur_mwh", "quantity_mwh"});
    std::vector<curves::OfferBlock> out;
    std::vector<std::string_view> f;
    while (r.next(f)) {
        curves::OfferBlock b;
        b.hour = hour_at(f[0], r.line());
        if (!out.empty() && b.hour < out.back().hour) throw ParseError("timestamps go backwards", r.line());
        try {
            b.owner = curves::parse_owner(f[1]);
        } catch (const InvalidArgument& e) {
            throw ParseError(e.what(), r.line());
        }
        if (f[2].empty()) throw ParseError("empty unit_id", r.line());
        b.unit_id = std::string(f[2]);
        b.price = csv::to_double(f[3], "price", r.line());
        b.quantity = csv::to_double(f[4], "quantity", r.line());
        if (!(b.quantity > 0.0)) throw ParseError("quantity must be positive", r.line());
        out.push_back(std::move(b));
    }
    if (out.empty()) throw ParseError("curves file has no rows", r.line());
    return out;
}

void write_curves(std::ostream& out, std::span<const curves::OfferBlock> blocks) {
    out << "timestamp,owner,unit_id,price_eur_mwh,quantity_mwh\n";
    for (const auto& b : blocks)
        out << format_hour(b.hour) << ',' << curves::to_string(b.owner) << ',' << b.unit_id << ',' << csv::num(b.price)
            << ',' << csv::num(b.quantity) << '\n';
}

std::vector<CovariateRecord> read_covariates(std::istream& in) {
    csv::Reader r(in, {"timestamp", "demand_forecast", "wind_forecast", "solar_forecast", "realized_price", "is_holiday"});
    std::vector<CovariateRecord> out;
    std::vector<std::string_view> f;
    while (r.next(f)) {
        CovariateRecord c;
        c.hour = hour_at(f[0], r.line());
        if (!out.empty() && c.hour <= out.back().hour) throw ParseError("timestamps must be strictly increasing", r.line());
        c.demand_forecast = csv::to_double(f[1], "demand_forecast", r.line());
        c.wind_forecast = csv::to_double(f[2], "wind_forecast", r.line());
        c.solar_forecast = csv::to_double(f[3], "solar_forecast", r.line());
        c.realized_price = csv::to_double(f[4], "realized_price", r.line());
        if (f[5] != "0" && f[5] != "1") throw ParseError("is_holiday must be 0 or 1", r.line());
        c.holiday = f[5] == "1";
        if (c.demand_forecast < 0.0 || c.wind_forecast < 0.0 || c.solar_forecast < 0.0)
            throw ParseError("forecasts must be non-negative", r.line());
        out.push_back(c);
    }
    if (out.empty()) throw ParseError("covariates file has no rows", r.line());
    return out;
}

void write_covariates(std::ostream& out, std::span<const CovariateRecord> rows) {
    out << "timestamp,demand_forecast,wind_forecast,solar_forecast,realized_price,is_holiday\n";
    for (const auto& c : rows)
        out << format_hour(c.hour) << ',' << csv::num(c.demand_forecast) << ',' << csv::num(c.wind_forecast) << ','
            << csv::num(c.solar_forecast) << ',' << csv::num(c.realized_price) << ',' << (c.holiday ? 1 : 0) << '\n';
}

std::vector<curves::OfferBlock> read_curves_file(const std::filesystem::path& path) {
    auto in = open(path);
    try {
        return read_curves(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::vector<CovariateRecord> read_covariates_file(const std::filesystem::path& path) {
    auto in = open(path);
    try {
        return read_covariates(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::map<HourStamp, HourOffers> group_by_hour(std::span<const curves::OfferBlock> blocks) {
    std::map<HourStamp, HourOffers> out;
    for (const auto& b : blocks) {
        auto& h = out[b.hour];
        (b.owner == curves::Owner::genco ? h.genco : h.competitors).push_back(b);
    }
    return out;
}

}  // namespace genco::app
