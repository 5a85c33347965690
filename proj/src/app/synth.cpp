#include "genco/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "core/csv.hpp"
#include "genco/market.hpp"

namespace genco::app {

using curves::OfferBlock;
using curves::Owner;

int SyntheticMarketSpec::competitor_units() const {
    int n = 0;
    for (const auto& t : technologies) n += t.units;
    return n;
}

void SyntheticMarketSpec::validate() const {
    if (competitor_units() <= 0) throw InvalidArgument("degenerate market: no competitor producers");
    if (genco.empty()) throw InvalidArgument("degenerate market: the producer has no thermal units");
    if (history_days < 8) throw InvalidArgument("history must cover at least 8 days");
    if (test_days < 0) throw InvalidArgument("test days must be non-negative");
    for (const auto& t : technologies)
        if (t.units < 0 || !(t.capacity > 0.0) || !(t.low >= 0.0) || t.high < t.low)
            throw InvalidArgument(fmt::format("invalid cost band for {}", t.technology));
    for (const auto& g : genco)
        if (!(g.cost > 0.0) || !(g.capacity > 0.0)) throw InvalidArgument("producer units need positive cost and capacity");
    if (!(genco_markup >= 0.0 && genco_markup < 1.0)) throw InvalidArgument("markup must lie in [0, 1)");
    if (genco_renewable < 0.0 || wind_capacity < 0.0 || solar_capacity < 0.0 || solar_storage < 0.0 || !(demand_base > 0.0))
        throw InvalidArgument("capacities and demand must be non-negative");
    if (mode == PriceMode::linear && truth.blocks.size() != genco.size())
        throw InvalidArgument("linear truth needs one block coefficient per producer unit");
}

std::pair<double, double> SyntheticMarketSpec::price_envelope() const {
    double lo = 0.0;
    double hi = 0.0;
    for (const auto& t : technologies) hi = std::max(hi, t.high);
    for (const auto& g : genco) hi = std::max(hi, g.cost * (1.0 + genco_markup));
    return {lo, hi};
}

namespace {

bool is_holiday(Day d) {
    static constexpr std::array<std::pair<unsigned, unsigned>, 9> dates{
        {{1, 1}, {1, 6}, {5, 1}, {8, 15}, {10, 12}, {11, 1}, {12, 6}, {12, 8}, {12, 25}}};
    const std::chrono::year_month_day ymd{d};
    for (auto [m, dd] : dates)
        if (static_cast<unsigned>(ymd.month()) == m && static_cast<unsigned>(ymd.day()) == dd) return true;
    return false;
}

}  // namespace

SyntheticMarket generate_synthetic(const SyntheticMarketSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N;
    std::uniform_real_distribution<double> U;
    const double pi = std::numbers::pi;

    struct Unit {
        std::string id;
        double cost, low, high, capacity;
    };
    std::vector<Unit> units;
    for (const auto& t : spec.technologies)
        for (int k = 0; k < t.units; ++k)
            units.push_back({fmt::format("{}-{}", t.technology, k + 1), t.low + (t.high - t.low) * U(rng), t.low, t.high,
                             t.capacity * (0.8 + 0.4 * U(rng))});

    SyntheticMarket out;
    out.test_start = spec.start + std::chrono::days{spec.history_days};
    const int days = spec.history_days + spec.test_days;
    std::array<double, 24> disp{};
    for (int h = 0; h < 24; ++h)
        disp[static_cast<std::size_t>(h)] = spec.displacement_mean + spec.displacement_amplitude * std::sin(2.0 * pi * h / 24.0);
    double wind_level = 0.0;
    for (int d = 0; d < days; ++d) {
        const Day day = spec.start + std::chrono::days{d};
        const bool test = day >= out.test_start;
        const bool holiday = is_holiday(day);
        const int dow = day_of_week(HourStamp{day});
        const auto doy = static_cast<double>((day - std::chrono::sys_days{std::chrono::year_month_day{
                                                         std::chrono::year_month_day{day}.year(), std::chrono::January,
                                                         std::chrono::day{1}}})
                                                 .count());
        wind_level = 0.6 * wind_level + 0.8 * N(rng);
        const double sun = 0.6 + 0.4 * U(rng);
        const double season = 1.0 + 0.3 * std::cos(2.0 * pi * (doy - 172.0) / 365.0);
        for (int h = 0; h < 24; ++h) {
            const HourStamp hour = HourStamp{day} + std::chrono::hours{h};
            CovariateRecord c;
            c.hour = hour;
            c.holiday = holiday;
            double demand = spec.demand_base * (1.0 - spec.demand_daily * std::cos(2.0 * pi * (h - 4) / 24.0));
            demand *= 1.0 + spec.demand_seasonal * std::cos(2.0 * pi * (doy - 15.0) / 365.0);
            if (dow >= 5) demand *= 1.0 - spec.demand_weekend;
            if (holiday) demand *= 1.0 - spec.demand_holiday;
            demand *= 1.0 + spec.demand_noise * N(rng);
            c.demand_forecast = std::round(demand * 10.0) / 10.0;
            const double wf = std::clamp(0.35 + 0.2 * wind_level + 0.08 * N(rng), 0.02, 0.95);
            c.wind_forecast = std::round(spec.wind_capacity * wf * 10.0) / 10.0;
            const double light = std::max(0.0, std::sin(pi * (h - 6) / 14.0));
            const double storage = spec.solar_storage * (0.3 + 0.7 * sun) * (light > 0.0 ? 0.5 : 1.0);
            c.solar_forecast = std::round((spec.solar_capacity * light * sun * season / 1.3 + storage) * 10.0) / 10.0;
            const double own = std::clamp(wf + 0.15 * N(rng), 0.01, 1.0);
            const double genco_ren = std::round(spec.genco_renewable * own * 10.0) / 10.0;

            const std::size_t first = out.curves.size();
            const double res = c.wind_forecast + c.solar_forecast;
            if (res > 0.0) out.curves.push_back({0.0, res, Owner::competitor, "res", hour});
            for (const auto& u : units) {
                const double p = std::clamp(u.cost * (1.0 + spec.offer_noise * N(rng)), u.low, u.high);
                out.curves.push_back({std::round(p * 100.0) / 100.0, u.capacity, Owner::competitor, u.id, hour});
            }
            if (genco_ren > 0.0) out.curves.push_back({0.0, genco_ren, Owner::genco, "genco-ren", hour});
            std::vector<double> gprice;
            for (std::size_t k = 0; k < spec.genco.size(); ++k) {
                const auto& g = spec.genco[k];
                double p = g.cost;
                if (!test) p = std::round(g.cost * (1.0 - spec.genco_markup + 2.0 * spec.genco_markup * U(rng)) * 100.0) / 100.0;
                gprice.push_back(p);
                out.curves.push_back({p, g.capacity, Owner::genco, fmt::format("genco-{}", k + 1), hour});
            }
            const double shift = disp[static_cast<std::size_t>(h)] + spec.displacement_noise * N(rng);
            if (spec.mode == PriceMode::clearing) {
                const std::vector<OfferBlock> hour_blocks(out.curves.begin() + static_cast<long>(first), out.curves.end());
                const auto curve = market::apply_displacement(curves::build_curve(hour_blocks), shift);
                try {
                    c.realized_price = market::clear(curve, c.demand_forecast).price;
                } catch (const market::ScarcityError& e) {
                    throw InvalidArgument(fmt::format("degenerate market at {}: {}", format_hour(hour), e.what()));
                }
            } else {
                std::sort(gprice.begin(), gprice.end());
                const auto& t = spec.truth;
                double p = t.intercept + t.renewable * genco_ren + t.demand * c.demand_forecast +
                           t.wind * c.wind_forecast + t.solar * c.solar_forecast;
                for (std::size_t k = 0; k < gprice.size(); ++k) p += t.blocks[k] * gprice[k];
                c.realized_price = p + t.noise_sd * N(rng);
            }
            out.covariates.push_back(c);
        }
    }

    auto& truth = out.truth;
    truth.emplace_back("seed", static_cast<double>(seed));
    truth.emplace_back("linear_mode", spec.mode == PriceMode::linear ? 1.0 : 0.0);
    for (std::size_t k = 0; k < spec.genco.size(); ++k) truth.emplace_back(fmt::format("genco_cost_{}", k + 1), spec.genco[k].cost);
    for (const auto& u : units) truth.emplace_back("competitor_cost_" + u.id, u.cost);
    for (int h = 0; h < 24; ++h) truth.emplace_back(fmt::format("displacement_h{:02}", h), disp[static_cast<std::size_t>(h)]);
    if (spec.mode == PriceMode::linear) {
        const auto& t = spec.truth;
        truth.emplace_back("intercept", t.intercept);
        truth.emplace_back("renewable_quantity", t.renewable);
        for (std::size_t k = 0; k < t.blocks.size(); ++k) truth.emplace_back(fmt::format("block_price_{}", k + 1), t.blocks[k]);
        truth.emplace_back("demand_forecast", t.demand);
        truth.emplace_back("wind_forecast", t.wind);
        truth.emplace_back("solar_forecast", t.solar);
        truth.emplace_back("noise_sd", t.noise_sd);
    }
    return out;
}

void write_synthetic(const SyntheticMarket& m, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name);
        if (!f) throw Error("cannot write " + (dir / name).string());
        return f;
    };
    auto curves_out = open("curves.csv");
    write_curves(curves_out, m.curves);
    auto cov_out = open("covariates.csv");
    write_covariates(cov_out, m.covariates);
    auto truth_out = open("ground_truth.csv");
    truth_out << "key,value\n";
    for (const auto& [k, v] : m.truth) truth_out << k << ',' << csv::num(v) << '\n';
}

}  // namespace genco::app
