#include "circadian/kernels.hpp"
#include "circadian/series.hpp"
#include "circadian/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace circadian::stats {

namespace {

constexpr double kZ975 = 1.959963984540054;

void require_same_length(std::span<const double> x, std::span<const double> y, const char* who)
{
    if (x.size() != y.size())
        throw Error(std::string(who) + ": inputs differ in length");
}

double clamp_p(double p) { return std::clamp(p, 0.0, 1.0); }

std::pair<double, double> fisher_ci(double r, double se)
{
    if (std::fabs(r) >= 1.0)
        return {r, r};
    const double z = std::atanh(r);
    return {std::tanh(z - kZ975 * se), std::tanh(z + kZ975 * se)};
}

} // namespace

TestResult pearson(std::span<const double> x, std::span<const double> y)
{
    require_same_length(x, y, "pearson");
    if (x.size() < 3)
        throw Error("pearson: need at least 3 pairs");
    const double mx = mean(x), my = mean(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        throw Error("pearson: constant input");
    const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double n = static_cast<double>(x.size());
    const double df = n - 2.0;

    TestResult res;
    res.test = "pearson";
    res.statistic = r;
    res.df = df;
    res.n = {x.size()};
    if (std::fabs(r) == 1.0) {
        res.p_value = 0.0;
    } else {
        const double t = r * std::sqrt(df / (1.0 - r * r));
        res.p_value = t_two_sided_p(t, df);
        res.details.emplace_back("t", t);
    }
    if (x.size() > 3)
        res.ci95 = fisher_ci(r, 1.0 / std::sqrt(n - 3.0));
    return res;
}

BlandAltman bland_altman(std::span<const double> x, std::span<const double> y)
{
    require_same_length(x, y, "bland_altman");
    if (x.size() < 2)
        throw Error("bland_altman: need at least 2 pairs");
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        d[i] = x[i] - y[i];
    BlandAltman ba;
    ba.n = d.size();
    ba.bias = mean(d);
    ba.sd = sample_sd(d);
    ba.loa_lo = ba.bias - 1.96 * ba.sd;
    ba.loa_hi = ba.bias + 1.96 * ba.sd;
    return ba;
}

TestResult rm_corr(std::span<const RmObservation> data)
{
    std::map<std::string, std::vector<const RmObservation*>> by_subject;
    for (const auto& o : data)
        by_subject[o.subject].push_back(&o);
    if (by_subject.size() < 2)
        throw Error("rm_corr: need at least 2 subjects");

    double sxy = 0, sxx = 0, syy = 0;
    std::size_t pairs = 0, subjects = 0;
    for (const auto& [id, obs] : by_subject) {
        if (obs.size() < 2)
            throw Error("rm_corr: subject '" + id + "' has fewer than 2 pairs");
        double mx = 0, my = 0;
        for (const auto* o : obs) {
            mx += o->x;
            my += o->y;
        }
        mx /= static_cast<double>(obs.size());
        my /= static_cast<double>(obs.size());
        double sx = 0, sy = 0, sc = 0;
        for (const auto* o : obs) {
            sx += (o->x - mx) * (o->x - mx);
            sy += (o->y - my) * (o->y - my);
            sc += (o->x - mx) * (o->y - my);
        }
        if (sx == 0.0)
            continue; // constant x: contributes no within-subject information
        sxx += sx;
        syy += sy;
        sxy += sc;
        pairs += obs.size();
        ++subjects;
    }
    if (subjects == 0 || sxx == 0.0 || syy == 0.0)
        throw Error("rm_corr: no within-subject variation");
    const double df = static_cast<double>(pairs) - static_cast<double>(subjects) - 1.0;
    if (df < 1.0)
        throw Error("rm_corr: not enough degrees of freedom");

    const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    TestResult res;
    res.test = "rm_corr";
    res.statistic = r;
    res.df = df;
    res.n = {pairs, subjects};
    if (std::fabs(r) == 1.0) {
        res.p_value = 0.0;
    } else {
        const double t = r * std::sqrt(df / (1.0 - r * r));
        res.p_value = t_two_sided_p(t, df);
        res.details.emplace_back("t", t);
    }
    if (df > 3.0)
        res.ci95 = fisher_ci(r, 1.0 / std::sqrt(df - 3.0));
    return res;
}

TestResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y, const SignedRankOptions& opts)
{
    require_same_length(x, y, "wilcoxon_signed_rank");
    std::vector<double> d;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] != y[i])
            d.push_back(x[i] - y[i]);
    if (d.empty())
        throw Error("wilcoxon_signed_rank: all differences are zero");

    std::vector<double> absd(d.size());
    std::transform(d.begin(), d.end(), absd.begin(), [](double v) { return std::fabs(v); });
    double ties = 0.0;
    const auto ranks = midranks(absd, &ties);
    double w_plus = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] > 0.0)
            w_plus += ranks[i];

    const auto n = static_cast<double>(d.size());
    const double total = n * (n + 1.0) / 2.0;
    TestResult res;
    res.test = "wilcoxon_signed_rank";
    res.statistic = w_plus;
    res.n = {d.size()};
    res.details.emplace_back("w_minus", total - w_plus);

    if (d.size() <= opts.exact_max_n) {
        std::vector<std::int64_t> r2(d.size());
        std::int64_t total2 = 0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            r2[i] = std::llround(2.0 * ranks[i]);
            total2 += r2[i];
        }
        const std::int64_t s2 = std::llround(2.0 * w_plus);
        const std::int64_t observed = s2 * 2 > total2 ? s2 * 2 - total2 : total2 - s2 * 2;
        const std::uint64_t hits = kernels::signed_rank_tail_parallel(r2, observed, opts.threads);
        res.method = "exact";
        res.p_value = clamp_p(std::ldexp(static_cast<double>(hits), -static_cast<int>(d.size())));
    } else {
        const double mu = total / 2.0;
        const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - ties / 48.0;
        double z = 0.0;
        if (var > 0.0) {
            const double dev = w_plus - mu;
            const double cc = dev > 0 ? 0.5 : (dev < 0 ? -0.5 : 0.0);
            z = (dev - cc) / std::sqrt(var);
        }
        res.method = "normal";
        res.p_value = clamp_p(2.0 * normal_sf(std::fabs(z)));
        res.details.emplace_back("z", z);
    }
    return res;
}

TestResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b, const RankSumOptions& opts)
{
    if (a.empty() || b.empty())
        throw Error("wilcoxon_rank_sum: both samples must be non-empty");
    std::vector<double> all(a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    double ties = 0.0;
    const auto ranks = midranks(all, &ties);
    double r1 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        r1 += ranks[i];
    const auto n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
    const double nn = n1 + n2;
    const double u = r1 - n1 * (n1 + 1.0) / 2.0;
    const double mu = n1 * n2 / 2.0;
    const double var = n1 * n2 / 12.0 * ((nn + 1.0) - ties / (nn * (nn - 1.0)));

    double z = 0.0;
    if (var > 0.0) {
        const double dev = u - mu;
        const double cc = !opts.continuity ? 0.0 : (dev > 0 ? 0.5 : (dev < 0 ? -0.5 : 0.0));
        z = (dev - cc) / std::sqrt(var);
    }
    TestResult res;
    res.test = "wilcoxon_rank_sum";
    res.statistic = z;
    res.p_value = clamp_p(2.0 * normal_sf(std::fabs(z)));
    res.n = {a.size(), b.size()};
    res.method = "normal";
    res.details.emplace_back("u", u);
    res.details.emplace_back("rank_sum", r1);
    return res;
}

TestResult kruskal_wallis(std::span<const std::vector<double>> groups)
{
    if (groups.size() < 2)
        throw Error("kruskal_wallis: need at least 2 groups");
    std::vector<double> all;
    for (const auto& g : groups) {
        if (g.empty())
            throw Error("kruskal_wallis: empty group");
        all.insert(all.end(), g.begin(), g.end());
    }
    if (all.size() < 5)
        throw Error("kruskal_wallis: need at least 5 observations");
    double ties = 0.0;
    const auto ranks = midranks(all, &ties);
    const auto n = static_cast<double>(all.size());
    const double correction = 1.0 - ties / (n * n * n - n);
    if (correction <= 0.0)
        throw Error("kruskal_wallis: all values identical");

    double acc = 0.0;
    std::size_t offset = 0;
    TestResult res;
    for (const auto& g : groups) {
        double rs = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            rs += ranks[offset + i];
        acc += rs * rs / static_cast<double>(g.size());
        offset += g.size();
        res.n.push_back(g.size());
    }
    const double h = std::max(0.0, (12.0 / (n * (n + 1.0)) * acc - 3.0 * (n + 1.0)) / correction);
    res.test = "kruskal_wallis";
    res.statistic = h;
    res.df = static_cast<double>(groups.size() - 1);
    res.p_value = clamp_p(chi2_sf(h, *res.df));
    return res;
}

namespace {

double poly(std::span<const double> c, double x)
{
    double r = 0.0;
    for (std::size_t i = c.size(); i-- > 0;)
        r = r * x + c[i];
    return r;
}

} // namespace

TestResult shapiro_wilk(std::span<const double> data)
{
    const std::size_t n = data.size();
    if (n < 3 || n > 5000)
        throw Error("shapiro_wilk: n must be in [3, 5000]");
    std::vector<double> x(data.begin(), data.end());
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (!(range > 0.0))
        throw Error("shapiro_wilk: constant input");

    const std::size_t half = n / 2;
    std::vector<double> a(half);
    const auto an = static_cast<double>(n);
    if (n == 3) {
        a[0] = std::numbers::sqrt2 / 2.0;
    } else {
        static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
        static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
        std::vector<double> m(half);
        double summ2 = 0.0;
        for (std::size_t i = 0; i < half; ++i) {
            m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
            summ2 += m[i] * m[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, rsn) - m[0] / ssumm2;
        std::size_t i1 = 1;
        double fac = 0.0;
        if (n > 5) {
            const double a2 = -m[1] / ssumm2 + poly(c2, rsn);
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[1] = a2;
            i1 = 2;
        } else {
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
        }
        a[0] = a1;
        for (std::size_t i = i1; i < half; ++i)
            a[i] = -m[i] / fac;
    }

    const double mu = mean(x);
    double ss = 0.0;
    for (double v : x)
        ss += (v - mu) * (v - mu);
    double num = 0.0;
    for (std::size_t i = 0; i < half; ++i)
        num += a[i] * (x[n - 1 - i] - x[i]);
    const double w = std::min(1.0, num * num / ss);

    double p = 1.0;
    if (n == 3) {
        constexpr double pi6 = 6.0 / std::numbers::pi;
        constexpr double stqr = std::numbers::pi / 3.0;
        p = std::max(0.0, pi6 * (std::asin(std::sqrt(w)) - stqr));
    } else {
        static constexpr double c3[] = {0.5440, -0.39978, 0.025054, -6.714e-4};
        static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
        static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
        static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};
        static constexpr double g[] = {-2.273, 0.459};
        const double y0 = std::log1p(-w);
        const double xx = std::log(an);
        double m = 0.0, s = 0.0, y = y0;
        if (n <= 11) {
            const double gamma = poly(g, an);
            if (y >= gamma) {
                p = 1e-99;
                y = std::numeric_limits<double>::quiet_NaN();
            } else {
                y = -std::log(gamma - y);
            }
            m = poly(c3, an);
            s = std::exp(poly(c4, an));
        } else {
            m = poly(c5, xx);
            s = std::exp(poly(c6, xx));
        }
        if (!std::isnan(y))
            p = w >= 1.0 ? 1.0 : normal_sf((y - m) / s);
    }
    TestResult res;
    res.test = "shapiro_wilk";
    res.statistic = w;
    res.p_value = clamp_p(p);
    res.n = {n};
    return res;
}

TestResult dagostino_pearson(std::span<const double> x)
{
    const std::size_t count = x.size();
    if (count < 8)
        throw Error("dagostino_pearson: need at least 8 observations");
    const auto n = static_cast<double>(count);
    const double mu = mean(x);
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : x) {
        const double d = v - mu;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (!(m2 > 0.0))
        throw Error("dagostino_pearson: constant input");

    // Skewness z-score.
    const double b1 = m3 / std::pow(m2, 1.5);
    const double yv = b1 * std::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
    const double beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) /
                         ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
    const double delta = 1.0 / std::sqrt(0.5 * std::log(w2));
    const double alpha = std::sqrt(2.0 / (w2 - 1.0));
    const double ya = yv / alpha;
    const double z_skew = delta * std::log(ya + std::sqrt(ya * ya + 1.0));

    // Kurtosis z-score.
    const double b2 = m4 / (m2 * m2);
    const double e = 3.0 * (n - 1.0) / (n + 1.0);
    const double varb2 = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
    const double xk = (b2 - e) / std::sqrt(varb2);
    const double sqrtbeta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0)) *
                             std::sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0)));
    const double big_a =
        6.0 + 8.0 / sqrtbeta1 * (2.0 / sqrtbeta1 + std::sqrt(1.0 + 4.0 / (sqrtbeta1 * sqrtbeta1)));
    const double term1 = 1.0 - 2.0 / (9.0 * big_a);
    const double denom = 1.0 + xk * std::sqrt(2.0 / (big_a - 4.0));
    const double term2 = std::copysign(std::cbrt((1.0 - 2.0 / big_a) / std::fabs(denom)), denom);
    const double z_kurt = (term1 - term2) / std::sqrt(2.0 / (9.0 * big_a));

    const double k2 = z_skew * z_skew + z_kurt * z_kurt;
    TestResult res;
    res.test = "dagostino_pearson";
    res.statistic = k2;
    res.df = 2.0;
    res.p_value = clamp_p(chi2_sf(k2, 2.0));
    res.n = {count};
    res.details.emplace_back("z_skew", z_skew);
    res.details.emplace_back("z_kurtosis", z_kurt);
    return res;
}

} // namespace circadian::stats
