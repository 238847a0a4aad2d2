#include "circadian/series.hpp"
#include "circadian/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace circadian::stats {

namespace bm = boost::math;

std::optional<double> TestResult::detail(const std::string& key) const
{
    for (const auto& [k, v] : details)
        if (k == key)
            return v;
    return std::nullopt;
}

double normal_cdf(double x) { return bm::cdf(bm::normal(), x); }
double normal_sf(double x) { return bm::cdf(bm::complement(bm::normal(), x)); }

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw Error("normal_quantile: p must be in (0, 1)");
    return bm::quantile(bm::normal(), p);
}

double t_two_sided_p(double t, double df)
{
    if (std::isinf(t))
        return 0.0;
    return std::min(1.0, 2.0 * bm::cdf(bm::complement(bm::students_t(df), std::fabs(t))));
}

double t_quantile(double p, double df) { return bm::quantile(bm::students_t(df), p); }

double f_sf(double f, double df1, double df2)
{
    if (std::isinf(f))
        return 0.0;
    if (f <= 0.0)
        return 1.0;
    return bm::cdf(bm::complement(bm::fisher_f(df1, df2), f));
}

double chi2_sf(double x, double df)
{
    if (x <= 0.0)
        return 1.0;
    if (std::isinf(x))
        return 0.0;
    return bm::cdf(bm::complement(bm::chi_squared(df), x));
}

std::vector<double> midranks(std::span<const double> values, double* tie_term)
{
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    double ties = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]])
            ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            ranks[order[k]] = r;
        const auto t = static_cast<double>(j - i + 1);
        ties += t * t * t - t;
        i = j + 1;
    }
    if (tie_term)
        *tie_term = ties;
    return ranks;
}

double mean(std::span<const double> x)
{
    if (x.empty())
        throw Error("mean: empty input");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x)
{
    if (x.size() < 2)
        throw Error("sample_sd: need at least two values");
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x)
        ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double quantile(std::vector<double> x, double q)
{
    if (x.empty())
        throw Error("quantile: empty input");
    std::sort(x.begin(), x.end());
    const double h = (static_cast<double>(x.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

} // namespace circadian::stats
