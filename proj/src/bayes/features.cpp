#include "genco/bayes.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace genco::bayes {
namespace {

constexpr std::array<const char*, 6> kDays{"tue", "wed", "thu", "fri", "sat", "sun"};

void add_series_names(std::vector<std::string>& out, const std::string& base) {
    out.push_back(base + "_forecast");
    for (int lag : kLags) out.push_back(fmt::format("{}_lag_{}", base, lag));
    out.push_back(base + "_mean_24");
    out.push_back(base + "_max_24");
    out.push_back(base + "_min_24");
}

void check_length(const std::vector<double>& v, std::size_t n, const char* what) {
    if (v.size() != n) throw InvalidArgument(fmt::format("series '{}' has {} values, expected {}", what, v.size(), n));
}

void check_finite(const std::vector<double>& v, const HourlySeries& s, const char* what) {
    for (std::size_t k = 0; k < v.size(); ++k)
        if (!std::isfinite(v[k]))
            throw InvalidArgument(fmt::format("non-finite {} at {}", what, format_hour(s.hours[k])));
}

double* put_series(double* out, const std::vector<double>& v, std::size_t t) {
    *out++ = v[t];
    for (int lag : kLags) *out++ = v[t - static_cast<std::size_t>(lag)];
    double sum = 0.0;
    double hi = v[t - 1];
    double lo = v[t - 1];
    for (std::size_t k = t - 24; k < t; ++k) {
        sum += v[k];
        hi = std::max(hi, v[k]);
        lo = std::min(lo, v[k]);
    }
    *out++ = sum / 24.0;
    *out++ = hi;
    *out++ = lo;
    return out;
}

void validate(const HourlySeries& s, std::size_t blocks) {
    const std::size_t n = s.size();
    check_length(s.demand, n, "demand");
    check_length(s.wind, n, "wind");
    check_length(s.solar, n, "solar");
    check_length(s.price, n, "price");
    if (s.holiday.size() != n) throw InvalidArgument("series 'holiday' has the wrong length");
    for (std::size_t k = 1; k < n; ++k)
        if (s.hours[k] != s.hours[k - 1] + std::chrono::hours{1})
            throw InvalidArgument(fmt::format("misaligned timestamps: {} follows {}", format_hour(s.hours[k]),
                                              format_hour(s.hours[k - 1])));
    check_finite(s.demand, s, "demand");
    check_finite(s.wind, s, "wind");
    check_finite(s.solar, s, "solar");
    check_finite(s.price, s, "price");
    if (blocks > 0) {
        check_length(s.renewable, n, "renewable");
        if (s.block_prices.size() != blocks)
            throw InvalidArgument(fmt::format("expected {} block price series, got {}", blocks, s.block_prices.size()));
        for (const auto& b : s.block_prices) check_length(b, n, "block price");
    }
}

}  // namespace

std::vector<std::string> FeatureSpec::names() const {
    if (block_count < 0) throw InvalidArgument("block count must be non-negative");
    std::vector<std::string> out;
    out.push_back("renewable_quantity");
    for (int i = 1; i <= block_count; ++i) out.push_back(fmt::format("block_price_{}", i));
    add_series_names(out, "demand");
    add_series_names(out, "wind");
    add_series_names(out, "solar");
    for (int lag : kLags) out.push_back(fmt::format("price_lag_{}", lag));
    for (const char* d : kDays) out.push_back(fmt::format("dow_{}", d));
    for (int m = 2; m <= 12; ++m) out.push_back(fmt::format("month_{:02}", m));
    out.push_back("holiday");
    return out;
}

Eigen::VectorXd covariate_row(const HourlySeries& s, std::size_t t) {
    if (t < static_cast<std::size_t>(kHistoryHours) || t >= s.size())
        throw InvalidArgument(fmt::format("row {} lacks {} h of history", t, kHistoryHours));
    Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(FeatureSpec{0}.covariate_count()));
    double* out = row.data();
    out = put_series(out, s.demand, t);
    out = put_series(out, s.wind, t);
    out = put_series(out, s.solar, t);
    for (int lag : kLags) *out++ = s.price[t - static_cast<std::size_t>(lag)];
    const int dow = day_of_week(s.hours[t]);
    for (int d = 1; d <= 6; ++d) *out++ = dow == d ? 1.0 : 0.0;
    const int month = month_of(s.hours[t]);
    for (int m = 2; m <= 12; ++m) *out++ = month == m ? 1.0 : 0.0;
    *out++ = s.holiday[t] ? 1.0 : 0.0;
    return row;
}

RegressionDataset build_features(const HourlySeries& s, const FeatureSpec& spec) {
    const std::size_t n = s.size();
    if (n < static_cast<std::size_t>(kHistoryHours) + 1)
        throw InvalidArgument(
            fmt::format("insufficient history: {} hours given, at least {} needed", n, kHistoryHours + 1));
    validate(s, spec.decision_count() - 1);
    check_length(s.renewable, n, "renewable");
    check_finite(s.renewable, s, "renewable");
    for (const auto& b : s.block_prices) check_finite(b, s, "block price");

    RegressionDataset d;
    d.columns = spec.names();
    d.decision_count = spec.decision_count();
    const auto rows = static_cast<Eigen::Index>(n - kHistoryHours);
    d.X.resize(rows, static_cast<Eigen::Index>(d.columns.size()));
    d.y.resize(rows);
    const auto nd = static_cast<Eigen::Index>(d.decision_count);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto t = static_cast<std::size_t>(r) + kHistoryHours;
        d.X(r, 0) = s.renewable[t];
        for (std::size_t i = 0; i < s.block_prices.size(); ++i) d.X(r, static_cast<Eigen::Index>(i) + 1) = s.block_prices[i][t];
        d.X.row(r).tail(d.X.cols() - nd) = covariate_row(s, t).transpose();
        d.y(r) = s.price[t];
        d.hours.push_back(s.hours[t]);
    }
    return d;
}

RegressionDataset slice(const RegressionDataset& data, HourStamp first, HourStamp last) {
    RegressionDataset out;
    out.columns = data.columns;
    out.decision_count = data.decision_count;
    std::vector<Eigen::Index> keep;
    for (std::size_t k = 0; k < data.hours.size(); ++k)
        if (data.hours[k] >= first && data.hours[k] < last) keep.push_back(static_cast<Eigen::Index>(k));
    out.X.resize(static_cast<Eigen::Index>(keep.size()), data.X.cols());
    out.y.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t r = 0; r < keep.size(); ++r) {
        out.X.row(static_cast<Eigen::Index>(r)) = data.X.row(keep[r]);
        out.y(static_cast<Eigen::Index>(r)) = data.y(keep[r]);
        out.hours.push_back(data.hours[static_cast<std::size_t>(keep[r])]);
    }
    return out;
}

}  // namespace genco::bayes
