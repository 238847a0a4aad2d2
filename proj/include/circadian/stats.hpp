#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace circadian::stats {

struct TestResult {
    std::string test;
    double statistic = 0.0;
    double p_value = 1.0;
    std::optional<double> df;
    std::optional<std::pair<double, double>> ci95;
    std::vector<std::size_t> n;
    /// "exact" or "normal" where a test has both modes.
    std::string method;
    /// Secondary quantities (U, W+, z, ...), in insertion order.
    std::vector<std::pair<std::string, double>> details;

    std::optional<double> detail(const std::string& key) const;
};

// Distribution helpers (Boost.Math backed).
double normal_cdf(double x);
double normal_sf(double x);
double normal_quantile(double p);
double t_two_sided_p(double t, double df);
double t_quantile(double p, double df);
double f_sf(double f, double df1, double df2);
double chi2_sf(double x, double df);

/// Mid-ranks (1-based) of values; tie_term receives sum(t^3 - t) over tie groups.
std::vector<double> midranks(std::span<const double> values, double* tie_term = nullptr);

double mean(std::span<const double> x);
/// Sample standard deviation (n-1).
double sample_sd(std::span<const double> x);
/// Linear-interpolated quantile (type 7), q in [0,1].
double quantile(std::vector<double> x, double q);
double median(std::vector<double> x);

TestResult pearson(std::span<const double> x, std::span<const double> y);

struct BlandAltman {
    double bias = 0.0;
    double sd = 0.0;
    double loa_lo = 0.0;
    double loa_hi = 0.0;
    std::size_t n = 0;
};

BlandAltman bland_altman(std::span<const double> x, std::span<const double> y);

struct RmObservation {
    std::string subject;
    double x = 0.0;
    double y = 0.0;
};

/// Repeated-measures correlation (within-subject ANCOVA). Subjects whose x is
/// constant are dropped; df = pairs - subjects - 1 over the retained subjects.
TestResult rm_corr(std::span<const RmObservation> data);

struct SignedRankOptions {
    std::size_t exact_max_n = 25;
    int threads = 0;
};

/// Two-sided. statistic = W+ (sum of ranks of positive x - y).
TestResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                const SignedRankOptions& opts = {});

struct RankSumOptions {
    bool continuity = true;
};

/// Two-sided normal approximation with tie correction. statistic = z (positive
/// when a tends to rank higher); U of a in details.
TestResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b, const RankSumOptions& opts = {});

TestResult kruskal_wallis(std::span<const std::vector<double>> groups);

/// Royston's approximation, 3 <= n <= 5000.
TestResult shapiro_wilk(std::span<const double> x);

/// D'Agostino-Pearson omnibus K^2 (skewness and kurtosis z-scores), n >= 8.
TestResult dagostino_pearson(std::span<const double> x);

} // namespace circadian::stats
