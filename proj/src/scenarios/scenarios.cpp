#include "genco/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <tuple>

#include <fmt/format.h>

#include "core/csv.hpp"

namespace genco::scenarios {
namespace {

std::vector<std::size_t> block_columns(const bayes::PosteriorSummary& p) {
    std::vector<std::size_t> out;
    for (int i = 1;; ++i) {
        const auto name = fmt::format("block_price_{}", i);
        const auto it = std::find(p.names.begin(), p.names.end(), name);
        if (it == p.names.end()) break;
        out.push_back(static_cast<std::size_t>(it - p.names.begin()));
    }
    return out;
}

}  // namespace

ScenarioSet generate(const bayes::PosteriorSummary& posterior, int count, std::uint64_t seed,
                     const ScenarioOptions& options) {
    if (count <= 0) throw InvalidArgument(fmt::format("scenario count must be positive, got {}", count));
    if (options.hours <= 0) throw InvalidArgument("scenario horizon must be positive");
    const auto cols = block_columns(posterior);
    if (cols.empty()) throw InvalidArgument("posterior has no block price coefficients");
    if (options.sampling == Sampling::joint && posterior.retained.rows() == 0)
        throw InvalidArgument("joint sampling needs the retained posterior draws");

    ScenarioSet s;
    s.scenarios = count;
    s.hours = options.hours;
    s.blocks = static_cast<int>(cols.size());
    s.seed = seed;
    s.coefficient.assign(static_cast<std::size_t>(count) * s.hours * s.blocks, 0.0);
    s.probability.assign(static_cast<std::size_t>(count), 1.0 / count);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<Eigen::Index> pick(0, std::max<Eigen::Index>(0, posterior.retained.rows() - 1));
    std::vector<double> draw(cols.size());
    auto sample = [&] {
        if (options.sampling == Sampling::joint) {
            const Eigen::Index r = pick(rng);
            for (std::size_t i = 0; i < cols.size(); ++i) draw[i] = posterior.retained(r, static_cast<Eigen::Index>(cols[i]));
        } else {
            for (std::size_t i = 0; i < cols.size(); ++i) {
                const auto k = static_cast<Eigen::Index>(cols[i]);
                draw[i] = posterior.mean(k) + posterior.sd(k) * normal(rng);
            }
        }
    };
    for (int w = 0; w < count; ++w) {
        if (!options.per_hour) sample();
        for (int t = 0; t < s.hours; ++t) {
            if (options.per_hour) sample();
            for (int i = 0; i < s.blocks; ++i) s.beta(w, t, i) = draw[static_cast<std::size_t>(i)];
        }
    }
    return s;
}

void ExogenousForecast::validate() const {
    auto sized = [&](const std::vector<std::vector<double>>& m, const char* what) {
        if (m.size() != static_cast<std::size_t>(hours))
            throw InvalidArgument(fmt::format("{} has {} hours, expected {}", what, m.size(), hours));
        for (const auto& row : m)
            if (row.size() != static_cast<std::size_t>(blocks))
                throw InvalidArgument(fmt::format("{} has {} blocks, expected {}", what, row.size(), blocks));
    };
    if (hours <= 0 || blocks <= 0) throw InvalidArgument("forecast needs at least one hour and one block");
    if (D.size() != static_cast<std::size_t>(hours) || renewable.size() != static_cast<std::size_t>(hours))
        throw InvalidArgument("per-hour forecast terms have the wrong length");
    sized(quantity, "block quantities");
    sized(cost, "block costs");
    sized(flex, "price flexibility");
    for (int t = 0; t < hours; ++t) {
        if (!(renewable[static_cast<std::size_t>(t)] >= 0.0) || !std::isfinite(D[static_cast<std::size_t>(t)]))
            throw InvalidArgument(fmt::format("invalid renewable quantity or covariate term at hour {}", t));
        for (int i = 0; i < blocks; ++i) {
            const auto T = static_cast<std::size_t>(t);
            const auto I = static_cast<std::size_t>(i);
            if (!(quantity[T][I] >= 0.0) || !std::isfinite(quantity[T][I]))
                throw InvalidArgument(fmt::format("negative quantity at hour {} block {}", t, i + 1));
            if (!(flex[T][I] >= 0.0)) throw InvalidArgument(fmt::format("negative flexibility at hour {} block {}", t, i + 1));
            if (!std::isfinite(cost[T][I])) throw InvalidArgument(fmt::format("invalid cost at hour {} block {}", t, i + 1));
            if (i > 0 && cost[T][I] < cost[T][I - 1])
                throw InvalidArgument(fmt::format("block costs decrease at hour {} block {}", t, i + 1));
        }
    }
}

ExogenousForecast compute_exogenous(const bayes::PosteriorSummary& posterior, const Eigen::MatrixXd& covariates,
                                    const BlockSchedule& schedule, double fraction, int rigid_tail) {
    if (!(fraction >= 0.0) || !std::isfinite(fraction)) throw InvalidArgument("flexibility fraction must be non-negative");
    if (rigid_tail < 0) throw InvalidArgument("rigid block count must be non-negative");
    const auto cols = block_columns(posterior);
    const std::size_t nd = posterior.decision_count;
    if (nd != cols.size() + 1) throw InvalidArgument("posterior decision predictors do not match the block layout");
    const auto ncov = static_cast<Eigen::Index>(posterior.predictors() - nd);
    if (covariates.cols() != ncov)
        throw InvalidArgument(fmt::format("covariate rows have {} values, the model expects {}", covariates.cols(), ncov));
    const auto hours = static_cast<int>(covariates.rows());
    if (schedule.renewable.size() != static_cast<std::size_t>(hours) ||
        schedule.quantity.size() != static_cast<std::size_t>(hours) ||
        schedule.cost.size() != static_cast<std::size_t>(hours))
        throw InvalidArgument(fmt::format("block schedule does not cover the {} covariate hours", hours));

    ExogenousForecast f;
    f.hours = hours;
    f.blocks = static_cast<int>(cols.size());
    f.intercept = posterior.mean(0);
    f.beta_renewable = posterior.mean(posterior.index_of("renewable_quantity"));
    const Eigen::VectorXd beta = posterior.mean.tail(ncov);
    for (int t = 0; t < hours; ++t) {
        const auto T = static_cast<std::size_t>(t);
        f.D.push_back(covariates.row(t).dot(beta));
        f.renewable.push_back(schedule.renewable[T]);
        f.quantity.push_back(schedule.quantity[T]);
        f.cost.push_back(schedule.cost[T]);
        std::vector<double> flex(schedule.cost[T].size(), 0.0);
        for (std::size_t i = 0; i < flex.size(); ++i)
            if (static_cast<int>(i) < static_cast<int>(flex.size()) - rigid_tail) flex[i] = fraction * schedule.cost[T][i];
        f.flex.push_back(flex);
    }
    f.validate();
    return f;
}

Eigen::MatrixXd day_covariates(const bayes::HourlySeries& series, Day day) {
    const HourStamp first{day};
    std::size_t start = series.size();
    for (std::size_t k = 0; k < series.size(); ++k)
        if (series.hours[k] == first) {
            start = k;
            break;
        }
    Eigen::MatrixXd out;
    for (int h = 0; h < 24; ++h) {
        const std::size_t k = start + static_cast<std::size_t>(h);
        if (k >= series.size() || series.hours[k] != first + std::chrono::hours{h})
            throw InvalidArgument("missing covariates for hour " + format_hour(first + std::chrono::hours{h}));
        const Eigen::VectorXd row = bayes::covariate_row(series, k);
        if (out.size() == 0) out.resize(24, row.size());
        out.row(h) = row.transpose();
    }
    return out;
}

void write_csv(std::ostream& out, const ScenarioSet& s) {
    out << "scenario,block,hour,coefficient\n";
    for (int w = 0; w < s.scenarios; ++w)
        for (int i = 0; i < s.blocks; ++i)
            for (int t = 0; t < s.hours; ++t)
                out << w + 1 << ',' << i + 1 << ',' << t << ',' << csv::num(s.beta(w, t, i)) << '\n';
}

ScenarioSet read_csv(std::istream& in) {
    csv::Reader r(in, {"scenario", "block", "hour", "coefficient"});
    std::map<std::tuple<long, long, long>, double> cells;
    long W = 0, I = 0, T = 0;
    std::vector<std::string_view> f;
    while (r.next(f)) {
        const long w = csv::to_long(f[0], "scenario", r.line());
        const long i = csv::to_long(f[1], "block", r.line());
        const long t = csv::to_long(f[2], "hour", r.line());
        if (w < 1 || i < 1 || t < 0) throw ParseError("scenario and block are 1-based, hour is 0-based", r.line());
        if (!cells.emplace(std::tuple{w, i, t}, csv::to_double(f[3], "coefficient", r.line())).second)
            throw ParseError("duplicate scenario/block/hour entry", r.line());
        W = std::max(W, w);
        I = std::max(I, i);
        T = std::max(T, t + 1);
    }
    if (cells.empty()) throw ParseError("scenario file has no rows");
    if (static_cast<std::size_t>(W * I * T) != cells.size()) throw ParseError("scenario file is not a complete grid");
    ScenarioSet s;
    s.scenarios = static_cast<int>(W);
    s.blocks = static_cast<int>(I);
    s.hours = static_cast<int>(T);
    s.coefficient.resize(cells.size());
    s.probability.assign(static_cast<std::size_t>(W), 1.0 / static_cast<double>(W));
    for (const auto& [key, v] : cells) {
        const auto [w, i, t] = key;
        s.beta(static_cast<int>(w - 1), static_cast<int>(t), static_cast<int>(i - 1)) = v;
    }
    return s;
}

}  // namespace genco::scenarios
