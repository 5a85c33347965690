#include <doctest.h>

#include <random>
#include <sstream>

#include "genco/backtest.hpp"

using namespace genco;
using namespace genco::backtest;
using curves::OfferBlock;
using curves::Owner;

namespace {

const Day kDay = parse_day("2019-06-01");

curves::SteppedSupplyCurve competitors(HourStamp h, double scale = 1.0) {
    return curves::build_curve({{0.0, 1000.0 * scale, Owner::competitor, "c0", h},
                                {40.0, 500.0 * scale, Owner::competitor, "c1", h},
                                {60.0, 1000.0 * scale, Owner::competitor, "c2", h}});
}

scenarios::BlockSchedule schedule(int hours = 24) {
    scenarios::BlockSchedule s;
    for (int t = 0; t < hours; ++t) {
        s.renewable.push_back(200.0);
        s.quantity.push_back({300.0, 200.0});
        s.cost.push_back({30.0, 50.0});
    }
    return s;
}

std::vector<double> repeat(std::vector<double> hour) {
    std::vector<double> out;
    for (int t = 0; t < 24; ++t) out.insert(out.end(), hour.begin(), hour.end());
    return out;
}

/// `days` days of toy market ending the day before `first + days`, with
/// observations of zero displacement unless `noise`.
MarketHistory history(Day first, int days, double demand, std::mt19937_64* noise = nullptr) {
    MarketHistory m;
    std::uniform_real_distribution<double> U(-50.0, 50.0);
    for (int d = 0; d < days; ++d)
        for (int t = 0; t < 24; ++t) {
            const HourStamp h = HourStamp{first + std::chrono::days{d}} + std::chrono::hours{t};
            m.hours[h] = {competitors(h), demand};
            const double e = noise ? U(*noise) : 0.0;
            m.observations.push_back({h, demand + e, demand});
        }
    return m;
}

}  // namespace

TEST_CASE("single hour against hand clearing") {
    const HourStamp h{kDay};
    const HourMarket m{competitors(h), 1600.0};
    const auto s = schedule(1);
    // at cost: 0..1200 at zero, 30 EUR block to 1500, competitor 40 EUR sets the price
    auto r = run_hour(h, {45.0, 50.0}, {30.0, 50.0}, s, 0, m, 0.0);
    CHECK(r.baseline_price == 40.0);
    CHECK(r.baseline_profit == doctest::Approx(200.0 * 40.0 + 300.0 * 10.0));
    CHECK(r.price == 40.0);
    CHECK(r.profit == doctest::Approx(200.0 * 40.0));
    CHECK(r.increment() == doctest::Approx(-3000.0));

    // price-setting producer block raised to just under the next competitor step
    const HourMarket low{competitors(h), 1400.0};
    r = run_hour(h, {39.0, 55.0}, {30.0, 50.0}, s, 0, low, 0.0);
    CHECK(r.baseline_price == 30.0);
    CHECK(r.baseline_profit == doctest::Approx(200.0 * 30.0));
    CHECK(r.price == 39.0);
    CHECK(r.profit == doctest::Approx(200.0 * 39.0 + 200.0 * 9.0));
    CHECK(r.increment() > 0.0);
    CHECK(r.energy == doctest::Approx(400.0));
}

TEST_CASE("displacement shifts the assembled curve before clearing") {
    const HourStamp h{kDay};
    const auto s = schedule(1);
    const HourMarket m{competitors(h), 1400.0};
    const auto r = run_hour(h, {30.0, 50.0}, {30.0, 50.0}, s, 0, m, -300.0);
    // 300 MWh added at the cheap end: 1500 at zero covers the demand
    CHECK(r.price == 0.0);
    const std::vector<curves::SteppedSupplyCurve> parts{m.competitors, genco_curve(h, 200.0, {300.0, 200.0}, {30.0, 50.0})};
    const auto curve = market::apply_displacement(curves::aggregate(parts), -300.0);
    CHECK(r.price == market::clear(curve, 1400.0).price);
}

TEST_CASE("offers at cost give zero increments") {
    const auto m = history(kDay - std::chrono::days{3}, 4, 1600.0);
    const auto r = run_period({{kDay, repeat({30.0, 50.0}), schedule()}}, m, 3);
    REQUIRE(r.days.size() == 1);
    CHECK(r.days[0].increment() == 0.0);
    CHECK(r.increment.mean == 0.0);
    CHECK(r.increment.variance == 0.0);
    for (const auto& h : r.days[0].hours) CHECK(h.increment() == 0.0);
}

TEST_CASE("a one-day period reports that day") {
    const auto m = history(kDay - std::chrono::days{3}, 4, 1400.0);
    const auto offers = repeat({39.0, 55.0});
    const auto r = run_period({{kDay, offers, schedule()}}, m, 3);
    const auto disp = market::estimate_displacement(m.observations, kDay, 3);
    const auto d = run_day(kDay, offers, schedule(), m, disp);
    CHECK(r.profit.mean == d.profit);
    CHECK(r.profit.q1 == d.profit);
    CHECK(r.profit.q3 == d.profit);
    CHECK(r.baseline.mean == d.baseline_profit);
    CHECK(r.mean_price == doctest::Approx(39.0));
    CHECK(r.days[0].hours.size() == 24);
}

TEST_CASE("quantiles use inclusive interpolation") {
    CHECK(quantile({1, 2, 3, 4}, 0.25) == doctest::Approx(1.75));
    CHECK(quantile({1, 2, 3, 4}, 0.75) == doctest::Approx(3.25));
    CHECK(quantile({4, 1, 3, 2}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile({7}, 0.25) == 7.0);
    CHECK(quantile({1, 2, 3, 4}, 0.0) == 1.0);
    CHECK(quantile({1, 2, 3, 4}, 1.0) == 4.0);
    CHECK_THROWS_AS(quantile({}, 0.5), InvalidArgument);
    const auto s = summarize({2, 4, 4, 4, 5, 5, 7, 9});
    CHECK(s.mean == doctest::Approx(5.0));
    CHECK(s.variance == doctest::Approx(32.0 / 7.0));
}

TEST_CASE("summary statistics recompute from the day rows (property)") {
    std::mt19937_64 rng(42);
    const auto m = history(kDay - std::chrono::days{10}, 20, 1400.0, &rng);
    std::uniform_real_distribution<double> U(30.0, 39.9);
    std::vector<DayPlan> plans;
    for (int d = 0; d < 8; ++d) plans.push_back({kDay + std::chrono::days{d}, repeat({U(rng), 55.0}), schedule()});
    const auto r = run_period(plans, m, 5);
    std::vector<double> p, inc;
    for (const auto& d : r.days) {
        p.push_back(d.profit);
        inc.push_back(d.increment());
        double sum = 0.0;
        for (const auto& h : d.hours) sum += h.profit;
        CHECK(d.profit == doctest::Approx(sum));
    }
    const auto sp = summarize(p);
    CHECK(r.profit.mean == doctest::Approx(sp.mean));
    CHECK(r.profit.q1 == doctest::Approx(sp.q1));
    CHECK(r.profit.q3 == doctest::Approx(sp.q3));
    CHECK(r.profit.variance == doctest::Approx(sp.variance));
    CHECK(r.increment.mean == doctest::Approx(summarize(inc).mean));
}

TEST_CASE("later data does not change a day's replay") {
    std::mt19937_64 rng(7);
    const auto m = history(kDay - std::chrono::days{10}, 15, 1400.0, &rng);
    const std::vector<DayPlan> plans{{kDay, repeat({38.0, 55.0}), schedule()}};
    const auto before = run_period(plans, m, 5);
    auto changed = m;
    const HourStamp end{kDay + std::chrono::days{1}};
    for (auto& [h, hm] : changed.hours)
        if (h >= end) hm = {competitors(h, 0.5), 900.0};
    for (auto& o : changed.observations)
        if (o.hour >= HourStamp{kDay}) o.offered_quantity += 1000.0;
    const auto after = run_period(plans, changed, 5);
    std::ostringstream a, b;
    write_hours_csv(a, before);
    write_hours_csv(b, after);
    CHECK(a.str() == b.str());
}

TEST_CASE("replay errors carry context") {
    const auto m = history(kDay - std::chrono::days{3}, 3, 1400.0);
    CHECK_THROWS_WITH(run_period({{kDay, repeat({30.0, 50.0}), schedule()}}, m, 3),
                      doctest::Contains("no recorded market for hour 2019-06-01T00:00"));
    auto big = history(kDay - std::chrono::days{3}, 4, 9000.0);
    CHECK_THROWS_WITH(run_period({{kDay, repeat({30.0, 50.0}), schedule()}}, big, 3),
                      doctest::Contains("hour 2019-06-01T00:00: demand"));
    CHECK_THROWS_AS(run_day(kDay, std::vector<double>(5, 1.0), schedule(), m, {}), InvalidArgument);
    CHECK_THROWS_AS(run_period({}, m, 3), InvalidArgument);
}

TEST_CASE("report CSV layouts") {
    const auto m = history(kDay - std::chrono::days{3}, 4, 1400.0);
    const auto r = run_period({{kDay, repeat({39.0, 55.0}), schedule()}}, m, 3);
    std::ostringstream d, h, s, p;
    write_days_csv(d, r);
    write_hours_csv(h, r);
    write_summary_csv(s, r);
    write_hour_profile_csv(p, r);
    CHECK(d.str().rfind("day,profit,baseline_profit,increment,mean_price,baseline_mean_price\n2019-06-01,", 0) == 0);
    CHECK(h.str().rfind("timestamp,price,baseline_price,profit,baseline_profit,increment,energy\n2019-06-01T00:00,39,30,", 0) == 0);
    CHECK(s.str().find("\nincrement,") != std::string::npos);
    const auto profile = p.str();
    CHECK(std::count(profile.begin(), profile.end(), '\n') == 25);
}
