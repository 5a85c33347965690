#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "core/csv.hpp"
#include "genco/bayes.hpp"

namespace genco::bayes {
namespace {

struct Standardized {
    Eigen::MatrixXd Z;  ///< leading column of ones
    Eigen::VectorXd center;
    Eigen::VectorXd scale;
};

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) out += (out.empty() ? "'" : ", '") + n + "'";
    return out;
}

Standardized standardize(const RegressionDataset& d) {
    const Eigen::Index n = d.X.rows();
    const Eigen::Index p = d.X.cols();
    Standardized s;
    s.center = d.X.colwise().mean().transpose();
    s.scale.resize(p);
    std::vector<std::string> flat;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double var = (d.X.col(j).array() - s.center(j)).square().sum() / static_cast<double>(n);
        s.scale(j) = std::sqrt(var);
        if (!(s.scale(j) > 1e-12 * std::max(1.0, std::abs(s.center(j)))))
            flat.push_back(d.columns[static_cast<std::size_t>(j)]);
    }
    if (!flat.empty())
        throw CollinearityError("design matrix is rank deficient: constant column(s) " + join_names(flat) +
                                    " duplicate the intercept",
                                flat);
    s.Z.resize(n, p + 1);
    s.Z.col(0).setOnes();
    for (Eigen::Index j = 0; j < p; ++j) s.Z.col(j + 1) = (d.X.col(j).array() - s.center(j)) / s.scale(j);
    return s;
}

void check_rank(const Eigen::MatrixXd& Z, const std::vector<std::string>& names) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
    qr.setThreshold(1e-9);
    const Eigen::Index rank = qr.rank();
    if (rank == Z.cols()) return;
    const auto& perm = qr.colsPermutation().indices();
    std::vector<Eigen::Index> basis(perm.data(), perm.data() + rank);
    Eigen::MatrixXd B(Z.rows(), rank);
    for (Eigen::Index k = 0; k < rank; ++k) B.col(k) = Z.col(basis[static_cast<std::size_t>(k)]);
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> bqr(B);
    std::vector<std::string> involved;
    std::string detail;
    for (Eigen::Index k = rank; k < Z.cols(); ++k) {
        const Eigen::Index j = perm(k);
        const Eigen::VectorXd c = bqr.solve(Z.col(j));
        std::vector<std::string> with;
        for (Eigen::Index m = 0; m < rank; ++m)
            if (std::abs(c(m)) > 1e-7) with.push_back(names[static_cast<std::size_t>(basis[static_cast<std::size_t>(m)])]);
        involved.push_back(names[static_cast<std::size_t>(j)]);
        for (const auto& w : with)
            if (std::find(involved.begin(), involved.end(), w) == involved.end()) involved.push_back(w);
        detail += fmt::format("{}'{}' ~ {}", detail.empty() ? "" : "; ", names[static_cast<std::size_t>(j)],
                              with.empty() ? std::string("0") : join_names(with));
    }
    throw CollinearityError("design matrix is rank deficient: " + detail, involved);
}

}  // namespace

std::size_t PosteriorSummary::index_of(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw InvalidArgument("no coefficient named '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
}

PosteriorSummary fit_gibbs(const RegressionDataset& data, const GibbsOptions& o) {
    const Eigen::Index n = data.X.rows();
    const Eigen::Index p = data.X.cols();
    if (static_cast<std::size_t>(p) != data.columns.size())
        throw InvalidArgument("dataset column names do not match the design matrix");
    if (data.y.size() != n) throw InvalidArgument("response length does not match the design matrix");
    if (n <= p + 1) throw InvalidArgument(fmt::format("need more rows ({}) than coefficients ({})", n, p + 1));
    if (o.burn_in < 0 || o.draws <= o.burn_in) throw InvalidArgument("draws must exceed burn-in");
    if (o.draws - o.burn_in < 1000) throw InvalidArgument("at least 1000 draws must remain after burn-in");
    if (!(o.prior_variance > 0.0) || !(o.noise_shape > 0.0) || !(o.noise_scale > 0.0))
        throw InvalidArgument("prior hyperparameters must be positive");
    if (!data.y.allFinite() || !data.X.allFinite()) throw InvalidArgument("dataset contains non-finite values");

    const Standardized st = standardize(data);
    std::vector<std::string> names{"intercept"};
    names.insert(names.end(), data.columns.begin(), data.columns.end());
    check_rank(st.Z, names);

    const Eigen::Index q = p + 1;
    const Eigen::MatrixXd G = st.Z.transpose() * st.Z;
    const Eigen::VectorXd b = st.Z.transpose() * data.y;
    const double yy = data.y.squaredNorm();
    const double shape = o.noise_shape + 0.5 * static_cast<double>(n);

    std::mt19937_64 rng(o.seed);
    std::normal_distribution<double> normal;
    const int kept = o.draws - o.burn_in;
    Eigen::MatrixXd std_draws(kept, q);
    Eigen::VectorXd sigmas(kept);

    double sigma2 = 1.0;
    Eigen::VectorXd z(q);
    for (int it = 0; it < o.draws; ++it) {
        Eigen::MatrixXd A = G / sigma2;
        A.diagonal().array() += 1.0 / o.prior_variance;
        const Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() != Eigen::Success) throw Error("posterior precision is not positive definite");
        const Eigen::VectorXd m = llt.solve(b / sigma2);
        for (Eigen::Index k = 0; k < q; ++k) z(k) = normal(rng);
        const Eigen::VectorXd beta = m + llt.matrixU().solve(z);
        const double ssr = std::max(0.0, yy - 2.0 * beta.dot(b) + beta.dot(G * beta));
        std::gamma_distribution<double> gamma(shape, 1.0 / (o.noise_scale + 0.5 * ssr));
        sigma2 = 1.0 / gamma(rng);
        if (it >= o.burn_in) {
            std_draws.row(it - o.burn_in) = beta.transpose();
            sigmas(it - o.burn_in) = std::sqrt(sigma2);
        }
    }

    Eigen::MatrixXd nat(kept, q);
    nat.rightCols(p) = std_draws.rightCols(p).array().rowwise() / st.scale.transpose().array();
    nat.col(0) = std_draws.col(0) - nat.rightCols(p) * st.center;

    auto moments = [&](const Eigen::MatrixXd& D, Eigen::VectorXd& mean, Eigen::VectorXd& sd) {
        mean = D.colwise().mean().transpose();
        sd.resize(q);
        for (Eigen::Index j = 0; j < q; ++j)
            sd(j) = std::sqrt((D.col(j).array() - mean(j)).square().sum() / static_cast<double>(kept - 1));
    };

    PosteriorSummary s;
    s.names = std::move(names);
    moments(nat, s.mean, s.sd);
    moments(std_draws, s.std_mean, s.std_sd);
    s.noise_sd = sigmas.mean();
    s.draws = o.draws;
    s.burn_in = o.burn_in;
    s.decision_count = data.decision_count;
    if (o.keep_draws) s.retained = std::move(nat);
    return s;
}

double predict_mean(const PosteriorSummary& s, const Eigen::Ref<const Eigen::VectorXd>& row) {
    if (static_cast<std::size_t>(row.size()) != s.predictors())
        throw InvalidArgument(fmt::format("feature row has {} values, the model expects {}", row.size(), s.predictors()));
    return s.mean(0) + s.mean.tail(row.size()).dot(row);
}

FitMetrics evaluate(const PosteriorSummary& s, const RegressionDataset& data) {
    if (data.rows() == 0) throw InvalidArgument("cannot evaluate on an empty dataset");
    if (static_cast<std::size_t>(data.X.cols()) != s.predictors())
        throw InvalidArgument("dataset columns do not match the model");
    const Eigen::VectorXd pred = (data.X * s.mean.tail(data.X.cols())).array() + s.mean(0);
    const Eigen::ArrayXd err = (pred - data.y).array();
    FitMetrics m;
    m.mae = err.abs().mean();
    m.rmse = std::sqrt(err.square().mean());
    return m;
}

FitMetrics cross_validate(const RegressionDataset& data, int folds, const GibbsOptions& options) {
    if (folds < 2) throw InvalidArgument("cross-validation needs at least 2 folds");
    const auto n = static_cast<Eigen::Index>(data.rows());
    FitMetrics out;
    for (int f = 0; f < folds; ++f) {
        const Eigen::Index lo = n * f / folds;
        const Eigen::Index hi = n * (f + 1) / folds;
        if (hi <= lo) throw InvalidArgument(fmt::format("fold {} has no rows", f + 1));
        RegressionDataset train;
        RegressionDataset test;
        train.columns = test.columns = data.columns;
        train.decision_count = test.decision_count = data.decision_count;
        train.X.resize(n - (hi - lo), data.X.cols());
        train.y.resize(n - (hi - lo));
        train.X << data.X.topRows(lo), data.X.bottomRows(n - hi);
        train.y << data.y.head(lo), data.y.tail(n - hi);
        test.X = data.X.middleRows(lo, hi - lo);
        test.y = data.y.segment(lo, hi - lo);
        GibbsOptions o = options;
        o.keep_draws = false;
        const auto m = evaluate(fit_gibbs(train, o), test);
        out.fold_mae.push_back(m.mae);
        out.fold_rmse.push_back(m.rmse);
    }
    for (int f = 0; f < folds; ++f) {
        out.mae += out.fold_mae[static_cast<std::size_t>(f)] / folds;
        out.rmse += out.fold_rmse[static_cast<std::size_t>(f)] / folds;
    }
    return out;
}

double decision_share(const PosteriorSummary& s) {
    if (s.std_mean.size() < 2) throw InvalidArgument("summary has no predictors");
    const Eigen::ArrayXd a = s.std_mean.tail(s.std_mean.size() - 1).array().abs();
    const double total = a.sum();
    if (!(total > 0.0)) throw InvalidArgument("standardized coefficients have zero total mass");
    return 100.0 * a.head(static_cast<Eigen::Index>(s.decision_count)).sum() / total;
}

void write_summary_csv(std::ostream& out, const PosteriorSummary& s) {
    out << "coefficient,mean,sd,std_mean,std_sd\n";
    for (std::size_t j = 0; j < s.names.size(); ++j) {
        const auto k = static_cast<Eigen::Index>(j);
        out << s.names[j] << ',' << csv::num(s.mean(k)) << ',' << csv::num(s.sd(k)) << ','
            << csv::num(s.std_mean(k)) << ',' << csv::num(s.std_sd(k)) << '\n';
    }
    out << "noise_sd," << csv::num(s.noise_sd) << ",,,\n";
    out << "draws," << s.draws << ",,,\n";
    out << "burn_in," << s.burn_in << ",,,\n";
}

PosteriorSummary read_summary_csv(std::istream& in) {
    csv::Reader r(in, {"coefficient", "mean", "sd", "std_mean", "std_sd"});
    PosteriorSummary s;
    std::vector<double> mean, sd, smean, ssd;
    std::vector<std::string_view> f;
    bool meta = false;
    while (r.next(f)) {
        if (f[0] == "noise_sd" || f[0] == "draws" || f[0] == "burn_in") {
            meta = true;
            const double v = csv::to_double(f[1], f[0], r.line());
            if (f[0] == "noise_sd") s.noise_sd = v;
            else if (f[0] == "draws") s.draws = static_cast<int>(v);
            else s.burn_in = static_cast<int>(v);
            continue;
        }
        if (meta) throw ParseError("coefficient rows must precede the noise_sd row", r.line());
        s.names.emplace_back(f[0]);
        mean.push_back(csv::to_double(f[1], "mean", r.line()));
        sd.push_back(csv::to_double(f[2], "sd", r.line()));
        smean.push_back(csv::to_double(f[3], "std_mean", r.line()));
        ssd.push_back(csv::to_double(f[4], "std_sd", r.line()));
    }
    if (s.names.empty() || s.names.front() != "intercept")
        throw ParseError("posterior summary must start with the intercept row");
    auto vec = [](const std::vector<double>& v) { return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()))); };
    s.mean = vec(mean);
    s.sd = vec(sd);
    s.std_mean = vec(smean);
    s.std_sd = vec(ssd);
    for (std::size_t j = 1; j < s.names.size(); ++j) {
        const auto& nm = s.names[j];
        if (nm == "renewable_quantity" || nm.rfind("block_price_", 0) == 0) s.decision_count = j;
        else break;
    }
    return s;
}

void write_draws_csv(std::ostream& out, const PosteriorSummary& s) {
    for (std::size_t j = 0; j < s.names.size(); ++j) out << (j ? "," : "") << s.names[j];
    out << '\n';
    for (Eigen::Index r = 0; r < s.retained.rows(); ++r) {
        for (Eigen::Index j = 0; j < s.retained.cols(); ++j) out << (j ? "," : "") << csv::num(s.retained(r, j));
        out << '\n';
    }
}

}  // namespace genco::bayes
