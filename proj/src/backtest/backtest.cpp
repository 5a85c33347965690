#include "genco/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "core/csv.hpp"

namespace genco::backtest {

using curves::OfferBlock;
using curves::Owner;
using curves::SteppedSupplyCurve;

market::DisplacementObservation observe(HourStamp hour, const SteppedSupplyCurve& recorded, double realized_price,
                                        double realized_quantity) {
    return {hour, market::quantity_at_price(recorded, realized_price), realized_quantity};
}

SteppedSupplyCurve genco_curve(HourStamp hour, double renewable, const std::vector<double>& quantity,
                               const std::vector<double>& price) {
    if (quantity.size() != price.size()) throw InvalidArgument("block quantities and prices differ in length");
    std::vector<OfferBlock> blocks;
    if (renewable > 0.0) blocks.push_back({0.0, renewable, Owner::genco, "genco-0", hour});
    for (std::size_t i = 0; i < price.size(); ++i)
        if (quantity[i] > 0.0) blocks.push_back({price[i], quantity[i], Owner::genco, fmt::format("genco-{}", i + 1), hour});
    return curves::build_curve(std::move(blocks));
}

namespace {

struct Cleared {
    double price = 0.0;
    double profit = 0.0;
    double energy = 0.0;
};

Cleared clear_with(HourStamp hour, const std::vector<double>& price, const scenarios::BlockSchedule& s, int t,
                   const HourMarket& m, double shift) {
    const auto T = static_cast<std::size_t>(t);
    const auto& q = s.quantity[T];
    const auto& cost = s.cost[T];
    const double ren = s.renewable[T];
    std::vector<SteppedSupplyCurve> parts{m.competitors};
    bool any = ren > 0.0;
    for (double v : q) any = any || v > 0.0;
    if (any) parts.push_back(genco_curve(hour, ren, q, price));
    const auto curve = market::apply_displacement(curves::aggregate(parts), shift);
    market::ClearingResult r;
    try {
        r = market::clear(curve, m.demand);
    } catch (const market::ScarcityError& e) {
        throw Error(fmt::format("hour {}: {}", format_hour(hour), e.what()));
    }
    Cleared out{r.price, 0.0, 0.0};
    const auto& blocks = curve.blocks();
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        if (blocks[k].owner != Owner::genco || r.block_dispatch[k] <= 0.0) continue;
        const int id = std::stoi(blocks[k].unit_id.substr(6));
        const double c = id == 0 ? 0.0 : cost[static_cast<std::size_t>(id - 1)];
        out.profit += r.block_dispatch[k] * (r.price - c);
        out.energy += r.block_dispatch[k];
    }
    return out;
}

}  // namespace

HourResult run_hour(HourStamp hour, const std::vector<double>& offers, const std::vector<double>& baseline,
                    const scenarios::BlockSchedule& schedule, int t, const HourMarket& market, double shift) {
    const auto a = clear_with(hour, offers, schedule, t, market, shift);
    const auto b = clear_with(hour, baseline, schedule, t, market, shift);
    HourResult h;
    h.hour = hour;
    h.price = a.price;
    h.profit = a.profit;
    h.energy = a.energy;
    h.baseline_price = b.price;
    h.baseline_profit = b.profit;
    return h;
}

DayResult run_day(Day day, const std::vector<double>& offers, const scenarios::BlockSchedule& schedule,
                  const MarketHistory& history, const market::DisplacementProfile& displacement) {
    if (schedule.renewable.size() != 24 || schedule.quantity.size() != 24 || schedule.cost.size() != 24)
        throw InvalidArgument("producer schedule must cover 24 hours");
    const std::size_t I = schedule.quantity.front().size();
    if (offers.size() != 24 * I) throw InvalidArgument(fmt::format("expected {} offers, got {}", 24 * I, offers.size()));
    DayResult d;
    d.day = day;
    for (int t = 0; t < 24; ++t) {
        const HourStamp hour = HourStamp{day} + std::chrono::hours{t};
        const auto it = history.hours.find(hour);
        if (it == history.hours.end()) throw InvalidArgument("no recorded market for hour " + format_hour(hour));
        const auto T = static_cast<std::size_t>(t);
        if (schedule.quantity[T].size() != I || schedule.cost[T].size() != I)
            throw InvalidArgument(fmt::format("producer schedule has a ragged block layout at hour {}", t));
        const std::vector<double> mine(offers.begin() + static_cast<long>(T * I), offers.begin() + static_cast<long>((T + 1) * I));
        const auto h = run_hour(hour, mine, schedule.cost[T], schedule, t, it->second, displacement.shift[T]);
        d.profit += h.profit;
        d.baseline_profit += h.baseline_profit;
        d.mean_price += h.price / 24.0;
        d.baseline_mean_price += h.baseline_price / 24.0;
        d.hours.push_back(h);
    }
    return d;
}

DayResult run_day(Day day, const offering::OfferingSolution& solution, const scenarios::BlockSchedule& schedule,
                  const MarketHistory& history, const market::DisplacementProfile& displacement) {
    return run_day(day, solution.P, schedule, history, displacement);
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw InvalidArgument("quantile of no values");
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Summary summarize(const std::vector<double>& v) {
    if (v.empty()) throw InvalidArgument("cannot summarize no values");
    Summary s;
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    s.q1 = quantile(v, 0.25);
    s.q3 = quantile(v, 0.75);
    if (v.size() > 1) {
        for (double x : v) s.variance += (x - s.mean) * (x - s.mean);
        s.variance /= static_cast<double>(v.size() - 1);
    }
    return s;
}

BacktestReport run_period(const std::vector<DayPlan>& plans, const MarketHistory& history, int window_days) {
    if (plans.empty()) throw InvalidArgument("backtest period has no days");
    BacktestReport r;
    r.window_days = window_days;
    std::vector<double> a, b, inc;
    for (const auto& plan : plans) {
        const auto disp = market::estimate_displacement(history.observations, plan.day, window_days);
        r.days.push_back(run_day(plan.day, plan.offers, plan.schedule, history, disp));
        const auto& d = r.days.back();
        a.push_back(d.profit);
        b.push_back(d.baseline_profit);
        inc.push_back(d.increment());
        r.mean_price += d.mean_price / static_cast<double>(plans.size());
        r.baseline_mean_price += d.baseline_mean_price / static_cast<double>(plans.size());
    }
    r.profit = summarize(a);
    r.baseline = summarize(b);
    r.increment = summarize(inc);
    return r;
}

void write_days_csv(std::ostream& out, const BacktestReport& r) {
    out << "day,profit,baseline_profit,increment,mean_price,baseline_mean_price\n";
    for (const auto& d : r.days)
        out << format_day(d.day) << ',' << csv::num(d.profit) << ',' << csv::num(d.baseline_profit) << ','
            << csv::num(d.increment()) << ',' << csv::num(d.mean_price) << ',' << csv::num(d.baseline_mean_price) << '\n';
}

void write_hours_csv(std::ostream& out, const BacktestReport& r) {
    out << "timestamp,price,baseline_price,profit,baseline_profit,increment,energy\n";
    for (const auto& d : r.days)
        for (const auto& h : d.hours)
            out << format_hour(h.hour) << ',' << csv::num(h.price) << ',' << csv::num(h.baseline_price) << ','
                << csv::num(h.profit) << ',' << csv::num(h.baseline_profit) << ',' << csv::num(h.increment()) << ','
                << csv::num(h.energy) << '\n';
}

void write_summary_csv(std::ostream& out, const BacktestReport& r) {
    out << "series,mean,q1,q3,variance,mean_price\n";
    auto row = [&](const char* name, const Summary& s, double price) {
        out << name << ',' << csv::num(s.mean) << ',' << csv::num(s.q1) << ',' << csv::num(s.q3) << ','
            << csv::num(s.variance) << ',' << csv::num(price) << '\n';
    };
    row("strategy", r.profit, r.mean_price);
    row("baseline", r.baseline, r.baseline_mean_price);
    row("increment", r.increment, r.mean_price - r.baseline_mean_price);
}

void write_hour_profile_csv(std::ostream& out, const BacktestReport& r) {
    std::array<double, 24> sum{};
    std::array<int, 24> n{};
    for (const auto& d : r.days)
        for (const auto& h : d.hours) {
            const int k = hour_of_day(h.hour);
            sum[static_cast<std::size_t>(k)] += h.increment();
            ++n[static_cast<std::size_t>(k)];
        }
    out << "hour,mean_increment\n";
    for (std::size_t k = 0; k < 24; ++k) out << k << ',' << csv::num(n[k] ? sum[k] / n[k] : 0.0) << '\n';
}

}  // namespace genco::backtest
