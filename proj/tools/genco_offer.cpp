// genco-offer: command-line front end of the offering workflow.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "genco/pipeline.hpp"
#include "genco/synth.hpp"

using namespace genco;
using namespace genco::app;

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) throw Error("cannot write " + p.string());
    return f;
}

std::ifstream open_in(const std::filesystem::path& p) {
    std::ifstream f(p);
    if (!f) throw Error("cannot open " + p.string());
    return f;
}

/// `start:stop:step`, or a comma-separated list.
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        double a = 0, b = 0, s = 0;
        char c1 = 0, c2 = 0;
        std::istringstream in(text);
        if (!(in >> a >> c1 >> b >> c2 >> s) || c1 != ':' || c2 != ':' || !(s > 0.0) || b < a)
            throw InvalidArgument("grid must look like start:stop:step with a positive step");
        const auto n = static_cast<int>(std::floor((b - a) / s + 1e-9));
        for (int k = 0; k <= n; ++k) out.push_back(std::round((a + k * s) * 1e12) / 1e12);
        return out;
    }
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw InvalidArgument("empty grid");
    return out;
}

/// Base configuration: the file named by --config when present.
PipelineConfig base_config(int argc, char** argv) {
    for (int k = 1; k + 1 < argc; ++k)
        if (std::string(argv[k]) == "--config") return load_config(argv[k + 1]);
    return {};
}

void add_market_options(CLI::App* a, PipelineConfig& c) {
    a->add_option("--curves", c.curves, "Offer curves CSV");
    a->add_option("--covariates", c.covariates, "Covariates CSV");
    a->add_option("--blocks", c.blocks, "Producer blocks including the renewable one");
    a->add_option("--competitor-blocks", c.competitor_blocks, "Competitor blocks used in replay");
    a->add_option("--discretizer", c.discretizer, "dp or milp")
        ->transform(CLI::CheckedTransformer(std::map<std::string, Discretizer>{{"dp", Discretizer::dp}, {"milp", Discretizer::milp}}));
}

void add_offer_options(CLI::App* a, PipelineConfig& c) {
    a->add_option("--chi", c.chi, "Risk weight in [0, 1]");
    a->add_option("--alpha", c.alpha, "CVaR tail fraction");
    a->add_option("--flexibility", c.flexibility, "Allowed price deviation as a fraction of cost");
    a->add_option("--rigid-blocks", c.rigid_blocks, "Most expensive blocks kept at cost");
    a->add_option("--price-cap", c.price_cap, "Price cap, EUR/MWh");
    a->add_option("--gap", c.gap, "Relative optimality gap");
    a->add_option("--time-limit", c.time_limit, "Seconds per solve");
}

offering::OptimizeOptions solve_options(const PipelineConfig& c) {
    offering::OptimizeOptions o;
    o.gap_tolerance = c.gap;
    o.time_limit_seconds = c.time_limit;
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    PipelineConfig cfg;
    try {
        cfg = base_config(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    std::string config_path;

    CLI::App app{"Risk-averse day-ahead offers for a generating company"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic market");
    SyntheticMarketSpec spec;
    std::filesystem::path synth_out = "data";
    std::uint64_t synth_seed = 1;
    std::string mode = "clearing";
    synth->add_option("--out", synth_out, "Output directory");
    synth->add_option("--seed", synth_seed, "Random seed");
    synth->add_option("--history-days", spec.history_days, "Days before the test period");
    synth->add_option("--test-days", spec.test_days, "Test days");
    std::string synth_start;
    synth->add_option("--start", synth_start, "First day (YYYY-MM-DD)");
    synth->add_option("--mode", mode, "clearing or linear")->check(CLI::IsMember({"clearing", "linear"}));
    synth->add_option("--noise", spec.truth.noise_sd, "Noise sd of the linear price (linear mode)");
    synth->add_option("--markup", spec.genco_markup, "Producer markup range in training offers");

    // discretize
    auto* disc = app.add_subcommand("discretize", "Group offer curves into fewer blocks");
    std::filesystem::path disc_out;
    std::string disc_owner = "all";
    std::string disc_hour;
    int disc_groups = 7;
    disc->add_option("--curves", cfg.curves, "Offer curves CSV");
    disc->add_option("--blocks", disc_groups, "Number of groups");
    disc->add_option("--owner", disc_owner, "genco, competitor or all")->check(CLI::IsMember({"genco", "competitor", "all"}));
    disc->add_option("--hour", disc_hour, "Only this hour (YYYY-MM-DDTHH:00)");
    disc->add_option("--discretizer", cfg.discretizer, "dp or milp")
        ->transform(CLI::CheckedTransformer(std::map<std::string, Discretizer>{{"dp", Discretizer::dp}, {"milp", Discretizer::milp}}));
    disc->add_option("--out", disc_out, "Output CSV (default stdout)");

    // fit
    auto* fit = app.add_subcommand("fit", "Fit the price regression");
    std::filesystem::path fit_out = "posterior.csv", fit_draws;
    int folds = 0;
    add_market_options(fit, cfg);
    fit->add_option("--train-start", cfg.train_start, "First training day");
    fit->add_option("--train-end", cfg.train_end, "Last training day");
    fit->add_option("--draws", cfg.draws, "Gibbs draws including burn-in");
    fit->add_option("--burn-in", cfg.burn_in, "Burn-in draws");
    fit->add_option("--seed", cfg.seed, "Random seed");
    fit->add_option("--folds", folds, "Cross-validation folds (0 skips)");
    fit->add_option("--out", fit_out, "Posterior summary CSV");
    fit->add_option("--draws-out", fit_draws, "Retained draws CSV");

    // scenarios
    auto* scen = app.add_subcommand("scenarios", "Draw block-price coefficient scenarios");
    std::filesystem::path posterior_path = "posterior.csv", scen_out = "scenarios.csv";
    bool per_hour = false;
    scen->add_option("--posterior", posterior_path, "Posterior summary CSV");
    scen->add_option("--count", cfg.scenarios, "Number of scenarios");
    scen->add_option("--seed", cfg.seed, "Random seed");
    scen->add_flag("--per-hour", per_hour, "Redraw every hour");
    scen->add_option("--out", scen_out, "Scenario CSV");

    // optimize / frontier
    std::filesystem::path scen_path = "scenarios.csv", opt_out = "offers";
    std::string day_text;
    std::string grid_text = "0:1:0.1";
    auto* opt = app.add_subcommand("optimize", "Optimal offers for one day");
    auto* front = app.add_subcommand("frontier", "Expected profit versus CVaR over risk weights");
    for (auto* a : {opt, front}) {
        add_market_options(a, cfg);
        add_offer_options(a, cfg);
        a->add_option("--posterior", posterior_path, "Posterior summary CSV");
        a->add_option("--scenarios", scen_path, "Scenario CSV");
        a->add_option("--day", day_text, "Day to offer for (YYYY-MM-DD)")->required();
        a->add_option("--out", opt_out, "Output directory");
    }
    front->add_option("--chi-grid", grid_text, "start:stop:step or a list");

    // backtest
    auto* bt = app.add_subcommand("backtest", "Replay day offers against the recorded market");
    std::filesystem::path offers_path = "offers.csv", bt_out = "backtest";
    add_market_options(bt, cfg);
    bt->add_option("--offers", offers_path, "Day offers CSV (day,hour,block,price)");
    bt->add_option("--window", cfg.window_days, "Displacement window in days");
    bt->add_option("--out", bt_out, "Output directory");

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "Run every stage end to end");
    pipe->add_option("--config", config_path, "JSON configuration (flags override it)");
    add_market_options(pipe, cfg);
    add_offer_options(pipe, cfg);
    pipe->add_option("--output", cfg.output, "Output directory");
    pipe->add_option("--scenarios", cfg.scenarios, "Number of scenarios");
    pipe->add_option("--seed", cfg.seed, "Random seed");
    pipe->add_option("--window", cfg.window_days, "Displacement window in days");
    pipe->add_option("--draws", cfg.draws, "Gibbs draws including burn-in");
    pipe->add_option("--burn-in", cfg.burn_in, "Burn-in draws");
    pipe->add_option("--train-start", cfg.train_start, "First training day");
    pipe->add_option("--train-end", cfg.train_end, "Last training day");
    pipe->add_option("--test-start", cfg.test_start, "First test day");
    pipe->add_option("--test-end", cfg.test_end, "Last test day");
    pipe->add_option("--test-days", cfg.test_days, "Test days when no range is given");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            if (!synth_start.empty()) spec.start = parse_day(synth_start);
            spec.mode = mode == "linear" ? PriceMode::linear : PriceMode::clearing;
            const auto m = generate_synthetic(spec, synth_seed);
            write_synthetic(m, synth_out);
            std::cout << fmt::format("wrote {} offers and {} hours to {} (test period from {})\n", m.curves.size(),
                                     m.covariates.size(), synth_out.string(), format_day(m.test_start));
        } else if (*disc) {
            if (disc_groups < 1) throw InvalidArgument("--blocks must be positive");
            const auto blocks = read_curves_file(cfg.curves);
            const auto hours = group_by_hour(blocks);
            std::ofstream file;
            if (!disc_out.empty()) file = open_out(disc_out);
            std::ostream& out = disc_out.empty() ? std::cout : file;
            out << "timestamp,owner,group,first_block,last_block,price,quantity,error\n";
            std::optional<HourStamp> only;
            if (!disc_hour.empty()) only = parse_hour(disc_hour);
            bool found = false;
            for (const auto& [h, offers] : hours) {
                if (only && h != *only) continue;
                found = true;
                std::vector<std::pair<std::string, std::vector<curves::OfferBlock>>> parts;
                if (disc_owner == "all") {
                    auto all = offers.genco;
                    all.insert(all.end(), offers.competitors.begin(), offers.competitors.end());
                    parts.emplace_back("all", std::move(all));
                } else {
                    parts.emplace_back(disc_owner, disc_owner == "genco" ? offers.genco : offers.competitors);
                }
                for (const auto& [owner, list] : parts) {
                    if (list.empty()) continue;
                    const auto curve = curves::build_curve(list);
                    const auto g = std::min<std::size_t>(static_cast<std::size_t>(disc_groups), curve.size());
                    const auto r = discretize_with(curve, g, cfg.discretizer);
                    for (std::size_t k = 0; k < r.groups(); ++k)
                        out << format_hour(h) << ',' << owner << ',' << k + 1 << ',' << r.group_begin(k) + 1 << ','
                            << r.group_end[k] << ',' << fmt::format("{}", r.prices[k]) << ','
                            << fmt::format("{}", r.quantities[k]) << ',' << fmt::format("{}", r.error) << '\n';
                }
            }
            if (only && !found) throw InvalidArgument("no offers for hour " + disc_hour);
        } else if (*fit) {
            cfg.validate();
            const auto data = load_market(cfg.curves, cfg.covariates);
            const auto m = prepare(data, cfg.blocks, cfg.competitor_blocks, cfg.discretizer);
            auto features = bayes::build_features(m.series, {cfg.blocks - 1});
            if (!cfg.train_start.empty() || !cfg.train_end.empty()) {
                const HourStamp a = cfg.train_start.empty() ? features.hours.front() : HourStamp{parse_day(cfg.train_start)};
                const HourStamp b = cfg.train_end.empty() ? features.hours.back() + std::chrono::hours{1}
                                                          : HourStamp{parse_day(cfg.train_end) + std::chrono::days{1}};
                features = bayes::slice(features, a, b);
            }
            bayes::GibbsOptions g;
            g.draws = cfg.draws;
            g.burn_in = cfg.burn_in;
            g.seed = cfg.seed;
            const auto post = bayes::fit_gibbs(features, g);
            auto f = open_out(fit_out);
            bayes::write_summary_csv(f, post);
            if (!fit_draws.empty()) {
                auto d = open_out(fit_draws);
                bayes::write_draws_csv(d, post);
            }
            const auto metrics = bayes::evaluate(post, features);
            std::cout << fmt::format("{} rows, {} predictors: MAE {:.4f}, RMSE {:.4f}, decision share {:.2f}%\n",
                                     features.rows(), post.predictors(), metrics.mae, metrics.rmse, bayes::decision_share(post));
            if (folds > 0) {
                const auto cv = bayes::cross_validate(features, folds, g);
                std::cout << fmt::format("cross-validated over {} folds: MAE {:.4f}, RMSE {:.4f}\n", folds, cv.mae, cv.rmse);
            }
        } else if (*scen) {
            auto in = open_in(posterior_path);
            const auto post = bayes::read_summary_csv(in);
            scenarios::ScenarioOptions so;
            so.per_hour = per_hour;
            const auto set = scenarios::generate(post, cfg.scenarios, cfg.seed, so);
            auto f = open_out(scen_out);
            scenarios::write_csv(f, set);
        } else if (*opt || *front) {
            cfg.validate();
            auto pin = open_in(posterior_path);
            const auto post = bayes::read_summary_csv(pin);
            auto sin = open_in(scen_path);
            const auto set = scenarios::read_csv(sin);
            const auto data = load_market(cfg.curves, cfg.covariates);
            const auto m = prepare(data, cfg.blocks, cfg.competitor_blocks, cfg.discretizer);
            const auto problem = day_problem(m, post, set, parse_day(day_text), cfg);
            std::filesystem::create_directories(opt_out);
            if (*opt) {
                const auto s = offering::optimize(problem, solve_options(cfg));
                offering::evaluate_solution(s, problem);
                auto a = open_out(opt_out / "offers.csv");
                offering::write_offers_csv(a, s);
                auto b = open_out(opt_out / "profits.csv");
                offering::write_profits_csv(b, s, problem);
                auto c = open_out(opt_out / "summary.csv");
                offering::write_summary_csv(c, s, problem);
                std::cout << fmt::format("expected profit {:.2f}, CVaR {:.2f}, status {}, gap {:.2e}\n", s.expected_profit,
                                         s.cvar, milp::to_string(s.status), s.gap);
            } else {
                const auto points = offering::efficient_frontier(problem, parse_grid(grid_text), solve_options(cfg));
                auto f = open_out(opt_out / "frontier.csv");
                f << "chi,solved_chi,expected_profit,cvar,objective,status\n";
                for (const auto& p : points)
                    f << fmt::format("{},{},{},{},{},{}\n", p.chi, p.solved_chi, p.expected_profit, p.cvar, p.objective,
                                     milp::to_string(p.status));
            }
        } else if (*bt) {
            const auto data = load_market(cfg.curves, cfg.covariates);
            const auto m = prepare(data, cfg.blocks, cfg.competitor_blocks, cfg.discretizer);
            auto in = open_in(offers_path);
            const auto plans = read_day_offers_csv(in, m);
            const auto r = backtest::run_period(plans, m.history, cfg.window_days);
            std::filesystem::create_directories(bt_out);
            auto a = open_out(bt_out / "backtest_days.csv");
            backtest::write_days_csv(a, r);
            auto b = open_out(bt_out / "backtest_hours.csv");
            backtest::write_hours_csv(b, r);
            auto c = open_out(bt_out / "backtest_summary.csv");
            backtest::write_summary_csv(c, r);
            auto d = open_out(bt_out / "backtest_hour_profile.csv");
            backtest::write_hour_profile_csv(d, r);
            std::cout << fmt::format("mean profit {:.2f} vs {:.2f} at cost over {} days\n", r.profit.mean, r.baseline.mean,
                                     r.days.size());
        } else if (*pipe) {
            run_pipeline(cfg, &std::cerr);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
