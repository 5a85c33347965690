#include "genco/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "core/csv.hpp"

namespace genco::app {

using curves::OfferBlock;
using curves::Owner;
using curves::SteppedSupplyCurve;

void PipelineConfig::validate() const {
    if (blocks < 2) throw InvalidArgument("blocks must be at least 2 (renewable plus one priced block)");
    if (competitor_blocks < 1) throw InvalidArgument("competitor_blocks must be positive");
    if (scenarios < 1) throw InvalidArgument("scenarios must be positive");
    if (!(chi >= 0.0 && chi <= 1.0)) throw InvalidArgument("chi must lie in [0, 1]");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
    if (!(flexibility >= 0.0)) throw InvalidArgument("flexibility must be non-negative");
    if (rigid_blocks < 0) throw InvalidArgument("rigid_blocks must be non-negative");
    if (window_days < 1) throw InvalidArgument("window_days must be positive");
    if (!(price_cap > 0.0)) throw InvalidArgument("price_cap must be positive");
    if (test_days < 1) throw InvalidArgument("test_days must be positive");
    if (draws < 1000 + burn_in || burn_in < 0) throw InvalidArgument("draws must exceed burn_in by at least 1000");
    if (!(gap >= 0.0)) throw InvalidArgument("gap must be non-negative");
    if (!(time_limit > 0.0)) throw InvalidArgument("time_limit must be positive");
    for (const auto* s : {&train_start, &train_end, &test_start, &test_end})
        if (!s->empty()) parse_day(*s);
    if (!train_end.empty() && !test_start.empty() && parse_day(train_end) >= parse_day(test_start))
        throw InvalidArgument("training period must end before the test period starts");
    if (!train_start.empty() && !train_end.empty() && parse_day(train_start) > parse_day(train_end))
        throw InvalidArgument("train_start is after train_end");
    if (!test_start.empty() && !test_end.empty() && parse_day(test_start) > parse_day(test_end))
        throw InvalidArgument("test_start is after test_end");
}

Discretizer parse_discretizer(const std::string& name) {
    if (name == "dp") return Discretizer::dp;
    if (name == "milp") return Discretizer::milp;
    throw InvalidArgument("discretizer must be 'dp' or 'milp', got '" + name + "'");
}

PipelineConfig parse_config(const std::string& text, PipelineConfig c) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid configuration: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("configuration must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        try {
            if (key == "curves") c.curves = v.get<std::string>();
            else if (key == "covariates") c.covariates = v.get<std::string>();
            else if (key == "output") c.output = v.get<std::string>();
            else if (key == "blocks") c.blocks = v.get<int>();
            else if (key == "competitor_blocks") c.competitor_blocks = v.get<int>();
            else if (key == "scenarios") c.scenarios = v.get<int>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "chi") c.chi = v.get<double>();
            else if (key == "alpha") c.alpha = v.get<double>();
            else if (key == "flexibility") c.flexibility = v.get<double>();
            else if (key == "rigid_blocks") c.rigid_blocks = v.get<int>();
            else if (key == "window_days") c.window_days = v.get<int>();
            else if (key == "price_cap") c.price_cap = v.get<double>();
            else if (key == "train_start") c.train_start = v.get<std::string>();
            else if (key == "train_end") c.train_end = v.get<std::string>();
            else if (key == "test_start") c.test_start = v.get<std::string>();
            else if (key == "test_end") c.test_end = v.get<std::string>();
            else if (key == "test_days") c.test_days = v.get<int>();
            else if (key == "draws") c.draws = v.get<int>();
            else if (key == "burn_in") c.burn_in = v.get<int>();
            else if (key == "gap") c.gap = v.get<double>();
            else if (key == "time_limit") c.time_limit = v.get<double>();
            else if (key == "discretizer") c.discretizer = parse_discretizer(v.get<std::string>());
            else throw ParseError("unknown configuration key '" + key + "'");
        } catch (const nlohmann::json::type_error&) {
            throw ParseError("configuration key '" + key + "' has the wrong type");
        }
    }
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_json(const PipelineConfig& c) {
    nlohmann::ordered_json j;
    j["curves"] = c.curves.string();
    j["covariates"] = c.covariates.string();
    j["output"] = c.output.string();
    j["blocks"] = c.blocks;
    j["competitor_blocks"] = c.competitor_blocks;
    j["scenarios"] = c.scenarios;
    j["seed"] = c.seed;
    j["chi"] = c.chi;
    j["alpha"] = c.alpha;
    j["flexibility"] = c.flexibility;
    j["rigid_blocks"] = c.rigid_blocks;
    j["window_days"] = c.window_days;
    j["price_cap"] = c.price_cap;
    j["train_start"] = c.train_start;
    j["train_end"] = c.train_end;
    j["test_start"] = c.test_start;
    j["test_end"] = c.test_end;
    j["test_days"] = c.test_days;
    j["draws"] = c.draws;
    j["burn_in"] = c.burn_in;
    j["gap"] = c.gap;
    j["time_limit"] = c.time_limit;
    j["discretizer"] = c.discretizer == Discretizer::dp ? "dp" : "milp";
    return j.dump(2) + "\n";
}

curves::DiscretizationResult discretize_with(const SteppedSupplyCurve& curve, std::size_t groups, Discretizer d) {
    if (d == Discretizer::dp) return curves::discretize_dp_oracle(curve, groups);
    return curves::discretize(curve, groups);
}

SteppedSupplyCurve grouped_curve(const SteppedSupplyCurve& curve, std::size_t groups, Discretizer d) {
    if (curve.size() <= groups) return curve;
    const auto r = discretize_with(curve, groups, d);
    std::vector<OfferBlock> blocks;
    const auto& src = curve.blocks();
    for (std::size_t g = 0; g < r.groups(); ++g)
        blocks.push_back({r.prices[g], r.quantities[g], src[r.group_begin(g)].owner, fmt::format("group-{}", g + 1),
                          src.front().hour});
    return SteppedSupplyCurve::from_sorted(std::move(blocks));
}

GencoHour genco_hour(const std::vector<OfferBlock>& offers, int groups, Discretizer d) {
    GencoHour g;
    std::vector<OfferBlock> priced;
    for (const auto& b : offers) {
        if (b.price <= 0.0) g.renewable += b.quantity;
        else priced.push_back(b);
    }
    if (priced.size() < static_cast<std::size_t>(groups))
        throw InvalidArgument(fmt::format("producer has {} priced offers, fewer than the {} blocks requested",
                                          priced.size(), groups));
    const auto curve = grouped_curve(curves::build_curve(std::move(priced)), static_cast<std::size_t>(groups), d);
    g.price = curve.prices();
    g.quantity = curve.quantities();
    return g;
}

MarketData make_market(std::span<const OfferBlock> curves, std::vector<CovariateRecord> covariates) {
    MarketData m;
    m.offers = group_by_hour(curves);
    m.covariates = std::move(covariates);
    if (m.covariates.empty()) throw InvalidArgument("no covariate rows");
    for (std::size_t k = 1; k < m.covariates.size(); ++k)
        if (m.covariates[k].hour != m.covariates[k - 1].hour + std::chrono::hours{1})
            throw InvalidArgument("covariates skip from " + format_hour(m.covariates[k - 1].hour) + " to " +
                                  format_hour(m.covariates[k].hour));
    return m;
}

MarketData load_market(const std::filesystem::path& curves, const std::filesystem::path& covariates) {
    const auto blocks = read_curves_file(curves);
    return make_market(blocks, read_covariates_file(covariates));
}

PreparedMarket prepare(const MarketData& data, int blocks, int competitor_blocks, Discretizer d) {
    PreparedMarket m;
    auto& s = m.series;
    s.block_prices.assign(static_cast<std::size_t>(blocks - 1), {});
    for (const auto& c : data.covariates) {
        const auto it = data.offers.find(c.hour);
        if (it == data.offers.end() || it->second.genco.empty() || it->second.competitors.empty())
            throw InvalidArgument("missing producer or competitor offers for hour " + format_hour(c.hour));
        const auto& offers = it->second;
        const auto g = genco_hour(offers.genco, blocks - 1, d);
        s.hours.push_back(c.hour);
        s.demand.push_back(c.demand_forecast);
        s.wind.push_back(c.wind_forecast);
        s.solar.push_back(c.solar_forecast);
        s.price.push_back(c.realized_price);
        s.holiday.push_back(c.holiday ? 1 : 0);
        s.renewable.push_back(g.renewable);
        for (std::size_t i = 0; i < g.price.size(); ++i) s.block_prices[i].push_back(g.price[i]);
        m.genco[c.hour] = g;

        const auto comp = curves::build_curve(offers.competitors);
        m.history.hours[c.hour] = {grouped_curve(comp, static_cast<std::size_t>(competitor_blocks), d), c.demand_forecast};
        std::vector<OfferBlock> all = offers.competitors;
        all.insert(all.end(), offers.genco.begin(), offers.genco.end());
        m.history.observations.push_back(
            backtest::observe(c.hour, curves::build_curve(std::move(all)), c.realized_price, c.demand_forecast));
    }
    return m;
}

scenarios::BlockSchedule day_schedule(const PreparedMarket& m, Day day) {
    scenarios::BlockSchedule s;
    for (int t = 0; t < 24; ++t) {
        const HourStamp h = HourStamp{day} + std::chrono::hours{t};
        const auto it = m.genco.find(h);
        if (it == m.genco.end()) throw InvalidArgument("no producer offers for hour " + format_hour(h));
        s.renewable.push_back(it->second.renewable);
        s.quantity.push_back(it->second.quantity);
        s.cost.push_back(it->second.price);
    }
    return s;
}

offering::OfferingProblem day_problem(const PreparedMarket& m, const bayes::PosteriorSummary& posterior,
                                      const scenarios::ScenarioSet& set, Day day, const PipelineConfig& c) {
    offering::OfferingProblem p;
    p.scenarios = set;
    p.forecast = scenarios::compute_exogenous(posterior, scenarios::day_covariates(m.series, day), day_schedule(m, day),
                                              c.flexibility, c.rigid_blocks);
    p.chi = c.chi;
    p.alpha = c.alpha;
    p.big_m = c.price_cap;
    return p;
}

std::pair<DayRange, DayRange> resolve_periods(const PipelineConfig& c, const MarketData& data) {
    const Day first_day = day_of(data.covariates.front().hour);
    const Day last_day = day_of(data.covariates.back().hour - std::chrono::hours{23});
    DayRange test, train;
    test.last = c.test_end.empty() ? last_day : parse_day(c.test_end);
    test.first = c.test_start.empty() ? test.last - std::chrono::days{c.test_days - 1} : parse_day(c.test_start);
    train.first = c.train_start.empty() ? first_day : parse_day(c.train_start);
    train.last = c.train_end.empty() ? test.first - std::chrono::days{1} : parse_day(c.train_end);
    if (test.first > test.last) throw InvalidArgument("empty test period");
    if (train.first > train.last) throw InvalidArgument("empty training period");
    if (train.last >= test.first) throw InvalidArgument("training period must end before the test period starts");
    if (train.first < first_day || test.last > last_day)
        throw InvalidArgument(fmt::format("periods must lie within the covariate coverage {} .. {}", format_day(first_day),
                                          format_day(last_day)));
    return {train, test};
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p);
    if (!f) throw Error("cannot write " + p.string());
    return f;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& c, std::ostream* log) {
    c.validate();
    auto say = [&](const std::string& s) {
        if (log) *log << s << '\n' << std::flush;
    };
    const auto data = load_market(c.curves, c.covariates);
    const auto [train, test] = resolve_periods(c, data);
    say(fmt::format("training {} .. {}, testing {} .. {}", format_day(train.first), format_day(train.last),
                    format_day(test.first), format_day(test.last)));
    const auto m = prepare(data, c.blocks, c.competitor_blocks, c.discretizer);

    PipelineResult r;
    const auto features = bayes::build_features(m.series, {c.blocks - 1});
    const auto rows = bayes::slice(features, HourStamp{train.first}, HourStamp{train.last + std::chrono::days{1}});
    if (rows.rows() == 0) throw InvalidArgument("training period has no rows with a full week of history");
    bayes::GibbsOptions g;
    g.draws = c.draws;
    g.burn_in = c.burn_in;
    g.seed = c.seed;
    r.posterior = bayes::fit_gibbs(rows, g);
    r.metrics = bayes::evaluate(r.posterior, rows);
    say(fmt::format("fitted {} predictors on {} hours: MAE {:.3f}, RMSE {:.3f}", r.posterior.predictors(), rows.rows(),
                    r.metrics.mae, r.metrics.rmse));
    r.scenario_set = scenarios::generate(r.posterior, c.scenarios, c.seed);

    offering::OptimizeOptions o;
    o.gap_tolerance = c.gap;
    o.time_limit_seconds = c.time_limit;
    std::vector<backtest::DayPlan> plans;
    for (Day d = test.first; d <= test.last; d += std::chrono::days{1}) {
        const auto t0 = std::chrono::steady_clock::now();
        DayOutcome out{d, day_problem(m, r.posterior, r.scenario_set, d, c), {}};
        out.solution = offering::optimize(out.problem, o);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        say(fmt::format("{}: expected profit {:.2f}, CVaR {:.2f}, {} ({:.1f} s)", format_day(d),
                        out.solution.expected_profit, out.solution.cvar, milp::to_string(out.solution.status), secs));
        plans.push_back({d, out.solution.P, day_schedule(m, d)});
        r.days.push_back(std::move(out));
    }
    r.report = backtest::run_period(plans, m.history, c.window_days);
    say(fmt::format("backtest mean profit {:.2f} vs {:.2f} at cost", r.report.profit.mean, r.report.baseline.mean));

    std::filesystem::create_directories(c.output);
    const auto& dir = c.output;
    {
        auto f = open_out(dir / "config.json");
        f << to_json(c);
    }
    {
        auto f = open_out(dir / "posterior.csv");
        bayes::write_summary_csv(f, r.posterior);
    }
    {
        auto f = open_out(dir / "fit_metrics.csv");
        f << "mae,rmse,rows\n" << csv::num(r.metrics.mae) << ',' << csv::num(r.metrics.rmse) << ',' << rows.rows() << '\n';
    }
    {
        auto f = open_out(dir / "scenarios.csv");
        scenarios::write_csv(f, r.scenario_set);
    }
    {
        auto f = open_out(dir / "offers.csv");
        write_day_offers_csv(f, r.days);
    }
    {
        auto f = open_out(dir / "day_summary.csv");
        f << "day,expected_profit,cvar,objective,status,gap,method\n";
        for (const auto& d : r.days)
            f << format_day(d.day) << ',' << csv::num(d.solution.expected_profit) << ',' << csv::num(d.solution.cvar) << ','
              << csv::num(d.solution.objective) << ',' << milp::to_string(d.solution.status) << ','
              << csv::num(d.solution.gap) << ',' << d.solution.method << '\n';
    }
    {
        auto f = open_out(dir / "profits.csv");
        f << "day,scenario,probability,profit\n";
        for (const auto& d : r.days)
            for (int w = 0; w < d.solution.scenarios; ++w)
                f << format_day(d.day) << ',' << w + 1 << ','
                  << csv::num(d.problem.scenarios.probability[static_cast<std::size_t>(w)]) << ','
                  << csv::num(d.solution.profit[static_cast<std::size_t>(w)]) << '\n';
    }
    {
        auto f = open_out(dir / "backtest_days.csv");
        backtest::write_days_csv(f, r.report);
    }
    {
        auto f = open_out(dir / "backtest_hours.csv");
        backtest::write_hours_csv(f, r.report);
    }
    {
        auto f = open_out(dir / "backtest_summary.csv");
        backtest::write_summary_csv(f, r.report);
    }
    {
        auto f = open_out(dir / "backtest_hour_profile.csv");
        backtest::write_hour_profile_csv(f, r.report);
    }
    return r;
}

void write_day_offers_csv(std::ostream& out, const std::vector<DayOutcome>& days) {
    out << "day,hour,block,price\n";
    for (const auto& d : days)
        for (int t = 0; t < d.solution.hours; ++t)
            for (int i = 0; i < d.solution.blocks; ++i)
                out << format_day(d.day) << ',' << t << ',' << i + 1 << ',' << csv::num(d.solution.offer(t, i)) << '\n';
}

std::vector<backtest::DayPlan> read_day_offers_csv(std::istream& in, const PreparedMarket& m) {
    csv::Reader r(in, {"day", "hour", "block", "price"});
    std::map<Day, std::map<std::pair<long, long>, double>> cells;
    std::vector<std::string_view> f;
    while (r.next(f)) {
        Day d;
        try {
            d = parse_day(f[0]);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), r.line());
        }
        const long t = csv::to_long(f[1], "hour", r.line());
        const long i = csv::to_long(f[2], "block", r.line());
        if (t < 0 || t > 23 || i < 1) throw ParseError("hour must be 0..23 and block 1-based", r.line());
        if (!cells[d].emplace(std::pair{t, i}, csv::to_double(f[3], "price", r.line())).second)
            throw ParseError("duplicate day/hour/block entry", r.line());
    }
    if (cells.empty()) throw ParseError("offers file has no rows");
    std::vector<backtest::DayPlan> plans;
    for (const auto& [day, grid] : cells) {
        auto schedule = day_schedule(m, day);
        const std::size_t I = schedule.quantity.front().size();
        if (grid.size() != 24 * I)
            throw ParseError(fmt::format("offers for {} must cover 24 hours x {} blocks", format_day(day), I));
        backtest::DayPlan p{day, {}, std::move(schedule)};
        for (const auto& [key, price] : grid) {
            if (static_cast<std::size_t>(key.second) > I)
                throw ParseError(fmt::format("offers for {} have block {} but the producer has {}", format_day(day), key.second, I));
            p.offers.push_back(price);
        }
        plans.push_back(std::move(p));
    }
    return plans;
}

}  // namespace genco::app
