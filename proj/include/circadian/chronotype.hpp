#pragma once

#include "circadian/stats.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace circadian {

enum class ChronotypeGroup { evening, intermediate, morning };

std::string to_string(ChronotypeGroup g);

/// Evening below 42, Morning above 58, Intermediate otherwise (boundaries included).
ChronotypeGroup classify_chronotype(double score);

struct MeqAdministration {
    int day = 0;
    double score = 0.0;
};

struct MeqScore {
    std::string participant;
    double score = 0.0;
    std::vector<MeqAdministration> administrations;

    /// Mean of the administrations; each must lie in [16, 86].
    static MeqScore from_administrations(std::string participant, std::vector<MeqAdministration> admins);
};

/// Named columns over participants (rows).
struct FeatureMatrix {
    std::vector<std::string> names;
    Eigen::MatrixXd values;

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
    FeatureMatrix select(const std::vector<std::size_t>& columns) const;
    std::size_t index_of(const std::string& name) const;
};

struct Coefficient {
    std::string name;
    double estimate = 0.0;
    double std_error = 0.0;
    double t = 0.0;
    double p_value = 1.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::optional<double> vif; // multi-predictor models only; +inf when collinear
};

struct RegressionModel {
    std::vector<std::string> features;
    Coefficient intercept;
    /// Features first, then controls.
    std::vector<Coefficient> coefficients;
    std::size_t n = 0;
    double df_model = 0.0;
    double df_resid = 0.0;
    double r_squared = 0.0;
    double adj_r_squared = 0.0;
    double f_statistic = 0.0;
    bool f_infinite = false;
    double f_p_value = 1.0;
    /// Omnibus K^2 on the residuals; absent when n < 8 or the fit is exact.
    std::optional<stats::TestResult> residual_normality;
    bool residuals_normal = true;
    std::vector<double> fitted;
    std::vector<double> residuals;
};

/// OLS of y on [1, X, controls]. Throws on rank deficiency, naming the collinear columns.
RegressionModel fit_ols(std::span<const double> y, const FeatureMatrix& x,
                        const std::optional<FeatureMatrix>& controls = std::nullopt);

/// VIF_j = 1 / (1 - R^2_j) regressing column j on the others; +inf under perfect collinearity.
std::vector<double> compute_vif(const FeatureMatrix& x);

struct Selection {
    std::vector<std::string> features;
    double r_squared = 0.0;
    double mean_vif = 0.0;
    RegressionModel model;
};

/// Exhaustive best-subset of size k in [2, 6] maximising R^2; ties go to the
/// lower mean VIF, then to the lexicographically smaller name list.
Selection select_top_k(std::span<const double> y, const FeatureMatrix& features, std::size_t k, int threads = 0);

struct PcaResult {
    std::vector<std::string> names;
    /// Column j holds the loadings of PC j+1.
    Eigen::MatrixXd loadings;
    /// Row i holds participant i's scores.
    Eigen::MatrixXd scores;
    std::vector<double> eigenvalues;
    std::vector<double> explained_variance;
};

/// PCA of the column-standardised features via the correlation matrix. Each
/// component is signed so that its largest-magnitude loading is positive.
PcaResult pca_biplot_data(const FeatureMatrix& x);

} // namespace circadian
