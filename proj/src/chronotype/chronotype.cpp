#include "circadian/chronotype.hpp"
#include "circadian/kernels.hpp"
#include "circadian/series.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace circadian {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// SSE below this fraction of SST is treated as an exact fit.
constexpr double kExactFit = 1e-20;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void check_finite(const Eigen::MatrixXd& m, const std::vector<std::string>& names)
{
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (!std::isfinite(m(i, j)))
                throw Error("non-finite value in column '" + names[static_cast<std::size_t>(j)] + "'");
}

/// Columns (of d, beyond the intercept) that add no rank to the ones before them.
std::vector<std::size_t> dependent_columns(const Eigen::MatrixXd& d)
{
    std::vector<std::size_t> out;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
        Eigen::MatrixXd trial(d.rows(), idx(kept.size()) + 1);
        for (std::size_t k = 0; k < kept.size(); ++k)
            trial.col(idx(k)) = d.col(kept[k]);
        trial.col(idx(kept.size())) = d.col(j);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(trial);
        if (qr.rank() == trial.cols())
            kept.push_back(j);
        else
            out.push_back(static_cast<std::size_t>(j));
    }
    return out;
}

double r2_on_others(const Eigen::MatrixXd& x, Eigen::Index j)
{
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd d(n, x.cols());
    d.col(0).setOnes();
    for (Eigen::Index c = 0, k = 1; c < x.cols(); ++c)
        if (c != j)
            d.col(k++) = x.col(c);
    const Eigen::VectorXd y = x.col(j);
    // Minimum-norm least squares keeps the projection defined when the other columns are collinear.
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(d);
    const double sse = (y - d * cod.solve(y)).squaredNorm();
    const double sst = (y.array() - y.mean()).square().sum();
    return 1.0 - sse / sst;
}

} // namespace

std::string to_string(ChronotypeGroup g)
{
    switch (g) {
    case ChronotypeGroup::evening:
        return "Evening";
    case ChronotypeGroup::intermediate:
        return "Intermediate";
    case ChronotypeGroup::morning:
        return "Morning";
    }
    return "?";
}

ChronotypeGroup classify_chronotype(double score)
{
    if (!std::isfinite(score))
        throw Error("classify_chronotype: score must be finite");
    if (score < 42.0)
        return ChronotypeGroup::evening;
    if (score > 58.0)
        return ChronotypeGroup::morning;
    return ChronotypeGroup::intermediate;
}

MeqScore MeqScore::from_administrations(std::string participant, std::vector<MeqAdministration> admins)
{
    if (admins.empty())
        throw Error("MEQ for '" + participant + "': no administrations");
    double sum = 0.0;
    for (const auto& a : admins) {
        if (!(a.score >= 16.0 && a.score <= 86.0))
            throw Error("MEQ for '" + participant + "': score outside [16, 86]");
        sum += a.score;
    }
    MeqScore m;
    m.participant = std::move(participant);
    m.score = sum / static_cast<double>(admins.size());
    m.administrations = std::move(admins);
    return m;
}

FeatureMatrix FeatureMatrix::select(const std::vector<std::size_t>& columns) const
{
    FeatureMatrix out;
    out.values.resize(values.rows(), idx(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k) {
        out.names.push_back(names.at(columns[k]));
        out.values.col(idx(k)) = values.col(idx(columns[k]));
    }
    return out;
}

std::size_t FeatureMatrix::index_of(const std::string& name) const
{
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end())
        throw Error("unknown feature '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
}

std::vector<double> compute_vif(const FeatureMatrix& x)
{
    if (x.cols() < 2)
        throw Error("compute_vif: need at least two features");
    if (x.names.size() != x.cols())
        throw Error("compute_vif: names/columns mismatch");
    check_finite(x.values, x.names);
    std::vector<double> vif(x.cols());
    for (std::size_t j = 0; j < x.cols(); ++j) {
        const auto col = x.values.col(idx(j));
        if ((col.array() == col(0)).all())
            throw Error("compute_vif: feature '" + x.names[j] + "' is constant");
        const double r2 = r2_on_others(x.values, idx(j));
        vif[j] = (std::isnan(r2) || 1.0 - r2 <= 1e-12) ? kInf : 1.0 / (1.0 - r2);
    }
    return vif;
}

RegressionModel fit_ols(std::span<const double> y, const FeatureMatrix& x, const std::optional<FeatureMatrix>& controls)
{
    const std::size_t n = y.size();
    if (x.names.size() != x.cols() || (controls && controls->names.size() != controls->cols()))
        throw Error("fit_ols: names/columns mismatch");
    if (x.rows() != n || (controls && controls->rows() != n))
        throw Error("fit_ols: row count differs from the length of y");
    if (x.cols() == 0)
        throw Error("fit_ols: no features");

    std::vector<std::string> names = x.names;
    Eigen::MatrixXd preds = x.values;
    if (controls && controls->cols() > 0) {
        preds.conservativeResize(Eigen::NoChange, x.values.cols() + controls->values.cols());
        preds.rightCols(controls->values.cols()) = controls->values;
        names.insert(names.end(), controls->names.begin(), controls->names.end());
    }
    const std::size_t p = names.size();
    if (n < p + 2)
        throw Error("fit_ols: need at least " + std::to_string(p + 2) + " observations");
    check_finite(preds, names);
    Eigen::VectorXd yv(idx(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(y[i]))
            throw Error("fit_ols: non-finite response");
        yv(idx(i)) = y[i];
    }

    Eigen::MatrixXd d(idx(n), idx(p) + 1);
    d.col(0).setOnes();
    d.rightCols(idx(p)) = preds;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d);
    if (qr.rank() < d.cols()) {
        std::string list;
        for (std::size_t c : dependent_columns(d)) {
            if (!list.empty())
                list += ", ";
            list += c == 0 ? std::string("(intercept)") : names[c - 1];
        }
        throw Error("fit_ols: rank-deficient design; collinear columns: " + list);
    }
    const Eigen::VectorXd beta = qr.solve(yv);
    const Eigen::VectorXd fitted = d * beta;
    const Eigen::VectorXd resid = yv - fitted;
    const double sst = (yv.array() - yv.mean()).square().sum();
    if (!(sst > 0.0))
        throw Error("fit_ols: response is constant");
    double sse = resid.squaredNorm();
    const bool exact = sse <= kExactFit * sst;
    if (exact)
        sse = 0.0;

    RegressionModel m;
    m.features = x.names;
    m.n = n;
    m.df_model = static_cast<double>(p);
    m.df_resid = static_cast<double>(n - p - 1);
    m.r_squared = std::clamp(1.0 - sse / sst, 0.0, 1.0);
    m.adj_r_squared = 1.0 - (1.0 - m.r_squared) * (static_cast<double>(n) - 1.0) / m.df_resid;
    const double mse = sse / m.df_resid;
    if (exact) {
        m.f_infinite = true;
        m.f_statistic = kInf;
        m.f_p_value = 0.0;
    } else {
        m.f_statistic = (m.r_squared / m.df_model) / ((1.0 - m.r_squared) / m.df_resid);
        m.f_p_value = stats::f_sf(m.f_statistic, m.df_model, m.df_resid);
    }

    const Eigen::MatrixXd xtx_inv = (d.transpose() * d).inverse();
    const double tcrit = stats::t_quantile(0.975, m.df_resid);
    std::optional<std::vector<double>> vif;
    if (p >= 2)
        vif = compute_vif(FeatureMatrix{names, preds});
    const auto coefficient = [&](std::size_t j, const std::string& name) {
        Coefficient c;
        c.name = name;
        c.estimate = beta(idx(j));
        c.std_error = std::sqrt(std::max(0.0, mse * xtx_inv(idx(j), idx(j))));
        if (c.std_error > 0.0) {
            c.t = c.estimate / c.std_error;
            c.p_value = stats::t_two_sided_p(c.t, m.df_resid);
        } else {
            c.t = c.estimate == 0.0 ? 0.0 : std::copysign(kInf, c.estimate);
            c.p_value = c.estimate == 0.0 ? 1.0 : 0.0;
        }
        c.ci_lo = c.estimate - tcrit * c.std_error;
        c.ci_hi = c.estimate + tcrit * c.std_error;
        if (vif && j > 0)
            c.vif = (*vif)[j - 1];
        return c;
    };
    m.intercept = coefficient(0, "(intercept)");
    for (std::size_t j = 0; j < p; ++j)
        m.coefficients.push_back(coefficient(j + 1, names[j]));

    m.fitted.assign(fitted.data(), fitted.data() + fitted.size());
    m.residuals.assign(resid.data(), resid.data() + resid.size());
    if (n >= 8 && !exact) {
        m.residual_normality = stats::dagostino_pearson(m.residuals);
        m.residuals_normal = m.residual_normality->p_value >= 0.05;
    }
    return m;
}

Selection select_top_k(std::span<const double> y, const FeatureMatrix& features, std::size_t k, int threads)
{
    if (k < 2 || k > 6)
        throw Error("select_top_k: k must be between 2 and 6");
    if (k > features.cols())
        throw Error("select_top_k: k exceeds the number of features");
    if (features.rows() != y.size())
        throw Error("select_top_k: row count differs from the length of y");

    const std::size_t n = features.rows(), p = features.cols();
    std::vector<double> row_major(n * p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j)
            row_major[i * p + j] = features.values(idx(i), idx(j));
    const auto subsets = kernels::k_subsets(p, k);
    const auto r2 = kernels::subset_r2_parallel(row_major, n, p, y, subsets, threads);

    double best = -kInf;
    for (double v : r2)
        if (!std::isnan(v))
            best = std::max(best, v);
    if (best == -kInf)
        throw Error("select_top_k: every subset is rank-deficient");

    std::optional<Selection> winner;
    for (std::size_t s = 0; s < subsets.size(); ++s) {
        if (std::isnan(r2[s]) || best - r2[s] > 1e-12 * std::max(1.0, std::fabs(best)))
            continue;
        const FeatureMatrix sub = features.select(subsets[s]);
        const auto vif = compute_vif(sub);
        Selection cand;
        cand.features = sub.names;
        cand.r_squared = r2[s];
        cand.mean_vif = std::accumulate(vif.begin(), vif.end(), 0.0) / static_cast<double>(vif.size());
        bool take = !winner;
        if (winner) {
            if (cand.mean_vif != winner->mean_vif)
                take = cand.mean_vif < winner->mean_vif;
            else
                take = cand.features < winner->features;
        }
        if (take)
            winner = std::move(cand);
    }
    winner->model = fit_ols(y, features.select([&] {
        std::vector<std::size_t> cols;
        for (const auto& name : winner->features)
            cols.push_back(features.index_of(name));
        return cols;
    }()));
    return *winner;
}

PcaResult pca_biplot_data(const FeatureMatrix& x)
{
    const std::size_t n = x.rows(), p = x.cols();
    if (p < 2 || n < 3)
        throw Error("pca_biplot_data: need at least 2 features and 3 rows");
    if (x.names.size() != p)
        throw Error("pca_biplot_data: names/columns mismatch");
    check_finite(x.values, x.names);

    Eigen::MatrixXd z = x.values;
    for (std::size_t j = 0; j < p; ++j) {
        auto col = z.col(idx(j));
        const double mu = col.mean();
        const double sd = std::sqrt((col.array() - mu).square().sum() / static_cast<double>(n - 1));
        if (!(sd > 0.0))
            throw Error("pca_biplot_data: feature '" + x.names[j] + "' is constant");
        col = (col.array() - mu) / sd;
    }
    const Eigen::MatrixXd corr = z.transpose() * z / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
    if (eig.info() != Eigen::Success)
        throw Error("pca_biplot_data: eigendecomposition failed");

    PcaResult out;
    out.names = x.names;
    out.loadings.resize(idx(p), idx(p));
    double total = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
        const Eigen::Index src = idx(p - 1 - c); // descending order
        Eigen::VectorXd v = eig.eigenvectors().col(src);
        Eigen::Index arg = 0;
        for (Eigen::Index i = 1; i < v.size(); ++i)
            if (std::fabs(v(i)) > std::fabs(v(arg)) + 1e-12)
                arg = i;
        if (v(arg) < 0.0)
            v = -v;
        out.loadings.col(idx(c)) = v;
        const double lambda = std::max(0.0, eig.eigenvalues()(src));
        out.eigenvalues.push_back(lambda);
        total += lambda;
    }
    for (double l : out.eigenvalues)
        out.explained_variance.push_back(l / total);
    out.scores = z * out.loadings;
    return out;
}

} // namespace circadian
