#include "circadian/rhythm.hpp"
#include "circadian/ingest.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace circadian {

namespace {

constexpr double kDay = 86400.0;

bool divides(double small, double big)
{
    const double ratio = big / small;
    return ratio >= 1.0 - 1e-9 && std::fabs(ratio - std::round(ratio)) < 1e-9;
}

struct Observations {
    std::vector<double> angle;
    std::vector<double> y;
    double first_mid = 0.0;
    double last_mid = 0.0;
};

Observations observations(const EpochSeries& s, double period_hours, double utc_offset_s)
{
    Observations o;
    bool first = true;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.is_valid(i))
            continue;
        const double mid = s.epoch_mid(i);
        if (first)
            o.first_mid = mid;
        first = false;
        o.last_mid = mid;
        o.angle.push_back(local_angle(mid, utc_offset_s, period_hours));
        o.y.push_back(s.values[i]);
    }
    return o;
}

} // namespace

double local_angle(double t_unix_s, double utc_offset_s, double period_hours)
{
    const double period = period_hours * 3600.0;
    double r = std::fmod(t_unix_s + utc_offset_s, period);
    if (r < 0.0)
        r += period;
    return 2.0 * std::numbers::pi * r / period;
}

CosinorFit fit_cosinor(const EpochSeries& s, double period_hours, double utc_offset_s)
{
    if (!(period_hours > 0.0))
        throw Error("fit_cosinor: period must be positive");
    const Observations o = observations(s, period_hours, utc_offset_s);
    const std::size_t n = o.y.size();
    if (n < 3)
        throw Error("fit_cosinor: need at least 3 valid epochs");
    if (o.last_mid - o.first_mid + s.epoch_len < period_hours * 3600.0 - 1e-6)
        throw Error("fit_cosinor: valid data must span at least one period");

    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 3);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        x(r, 0) = 1.0;
        x(r, 1) = std::cos(o.angle[i]);
        x(r, 2) = std::sin(o.angle[i]);
        y(r) = o.y[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < 3)
        throw Error("fit_cosinor: rank-deficient design (observations do not cover distinct phases)");
    const Eigen::VectorXd beta = qr.solve(y);

    CosinorFit fit;
    fit.n_points = n;
    fit.mesor = beta(0);
    fit.amplitude = std::hypot(beta(1), beta(2));
    fit.sse = (y - x * beta).squaredNorm();
    const double sst = (y.array() - y.mean()).square().sum();
    const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
    // Rounding residue of a constant series counts as zero variance.
    const bool flat = sst <= 1e-24 * scale * scale * static_cast<double>(n);
    fit.r_squared = flat ? 0.0 : std::clamp(1.0 - fit.sse / sst, 0.0, 1.0);

    if (fit.amplitude <= 1e-12 * scale) {
        fit.amplitude = 0.0;
        fit.r_squared = 0.0;
        fit.acrophase_defined = false;
        return fit;
    }
    fit.acrophase_defined = true;
    fit.phi_radians = std::atan2(-beta(2), beta(1));
    if (fit.phi_radians <= -std::numbers::pi)
        fit.phi_radians = std::numbers::pi;
    double acro = std::fmod(-fit.phi_radians * period_hours / (2.0 * std::numbers::pi), period_hours);
    if (acro < 0.0)
        acro += period_hours;
    if (acro >= period_hours)
        acro -= period_hours;
    fit.acrophase_hours = acro;
    return fit;
}

double cosinor_sse(const EpochSeries& s, double mesor, double amplitude, double acrophase_hours, double period_hours,
                   double utc_offset_s)
{
    const double theta = 2.0 * std::numbers::pi * acrophase_hours / period_hours;
    double sse = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.is_valid(i))
            continue;
        const double r = s.values[i] - mesor -
                         amplitude * std::cos(local_angle(s.epoch_mid(i), utc_offset_s, period_hours) - theta);
        sse += r * r;
    }
    return sse;
}

NonparametricMetrics nonparametric_metrics(const EpochSeries& s, const NonparametricOptions& opts)
{
    if (!divides(s.epoch_len, opts.bin_s) || !divides(opts.bin_s, kDay))
        throw Error("nonparametric_metrics: bin width must be a multiple of the epoch length and divide a day");

    // Work in local time so bins line up with local clock hours.
    EpochSeries local = s;
    local.start += opts.utc_offset_s;

    std::size_t first = local.size(), last = 0;
    for (std::size_t i = 0; i < local.size(); ++i)
        if (local.is_valid(i)) {
            first = std::min(first, i);
            last = i;
        }
    if (first == local.size() ||
        local.epoch_start(last) + local.epoch_len - local.epoch_start(first) < opts.min_days * kDay - 1e-6)
        throw Error("nonparametric_metrics: need at least " + std::to_string(opts.min_days) + " days of data");

    NonparametricMetrics out;

    // IS / IV on bins.
    const EpochSeries bins = epoch_aggregate(local, opts.bin_s, Aggregation::mean);
    const auto per_day = static_cast<std::size_t>(std::llround(kDay / opts.bin_s));
    std::vector<double> hod_sum(per_day, 0.0), hod_n(per_day, 0.0);
    double total = 0.0, count = 0.0;
    for (std::size_t i = 0; i < bins.size(); ++i) {
        if (!bins.is_valid(i))
            continue;
        const auto h = static_cast<std::size_t>(std::llround(std::floor(bins.epoch_start(i) / opts.bin_s))) % per_day;
        hod_sum[h] += bins.values[i];
        hod_n[h] += 1.0;
        total += bins.values[i];
        count += 1.0;
    }
    const double grand = total / count;
    double within = 0.0;
    for (std::size_t i = 0; i < bins.size(); ++i) {
        if (!bins.is_valid(i))
            continue;
        const auto h = static_cast<std::size_t>(std::llround(std::floor(bins.epoch_start(i) / opts.bin_s))) % per_day;
        const double d = bins.values[i] - hod_sum[h] / hod_n[h];
        within += d * d;
    }
    double numerator = 0.0, between = 0.0, present = 0.0;
    for (std::size_t h = 0; h < per_day; ++h) {
        if (hod_n[h] == 0.0)
            continue;
        const double d = hod_sum[h] / hod_n[h] - grand;
        present += 1.0;
        between += hod_n[h] * d * d;
    }
    const double per_hod = count / present;
    for (std::size_t h = 0; h < per_day; ++h) {
        if (hod_n[h] == 0.0)
            continue;
        const double d = hod_sum[h] / hod_n[h] - grand;
        numerator += per_hod * d * d;
    }
    const double total_ss = within + between;
    if (total_ss > 0.0) {
        out.is = numerator / total_ss;

        double diff_ss = 0.0, pairs = 0.0, dev_ss = 0.0;
        for (std::size_t i = 0; i < bins.size(); ++i) {
            if (!bins.is_valid(i))
                continue;
            dev_ss += (bins.values[i] - grand) * (bins.values[i] - grand);
            if (i > 0 && bins.is_valid(i - 1)) {
                const double d = bins.values[i] - bins.values[i - 1];
                diff_ss += d * d;
                pairs += 1.0;
            }
        }
        if (pairs > 0.0)
            out.iv = (diff_ss / pairs) / (dev_ss / count);
    }

    // M10 / L5 on the average day.
    const double profile_bin =
        opts.m10l5 == ProfileResolution::hourly ? 3600.0 : std::max(600.0, s.epoch_len);
    if (!divides(s.epoch_len, profile_bin))
        throw Error("nonparametric_metrics: epoch length incompatible with the M10/L5 profile resolution");
    const EpochSeries fine = epoch_aggregate(local, profile_bin, Aggregation::mean);
    const auto nprof = static_cast<std::size_t>(std::llround(kDay / profile_bin));
    std::vector<double> prof_sum(nprof, 0.0), prof_n(nprof, 0.0);
    for (std::size_t i = 0; i < fine.size(); ++i) {
        if (!fine.is_valid(i))
            continue;
        const auto b = static_cast<std::size_t>(std::llround(std::floor(fine.epoch_start(i) / profile_bin))) % nprof;
        prof_sum[b] += fine.values[i];
        prof_n[b] += 1.0;
    }
    const auto window_mean = [&](std::size_t start, std::size_t width) {
        double acc = 0.0, k = 0.0;
        for (std::size_t j = 0; j < width; ++j) {
            const std::size_t b = (start + j) % nprof;
            if (prof_n[b] > 0.0) {
                acc += prof_sum[b] / prof_n[b];
                k += 1.0;
            }
        }
        return k > 0.0 ? acc / k : std::numeric_limits<double>::quiet_NaN();
    };
    const auto w10 = static_cast<std::size_t>(std::llround(10.0 * 3600.0 / profile_bin));
    const auto w5 = static_cast<std::size_t>(std::llround(5.0 * 3600.0 / profile_bin));
    out.m10 = -std::numeric_limits<double>::infinity();
    out.l5 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nprof; ++j) {
        const double hi = window_mean(j, w10);
        const double lo = window_mean(j, w5);
        if (hi > out.m10) {
            out.m10 = hi;
            out.m10_start_hours = static_cast<double>(j) * profile_bin / 3600.0;
        }
        if (lo < out.l5) {
            out.l5 = lo;
            out.l5_start_hours = static_cast<double>(j) * profile_bin / 3600.0;
        }
    }
    if (out.m10 + out.l5 > 0.0)
        out.ra = (out.m10 - out.l5) / (out.m10 + out.l5);
    return out;
}

RhythmMetrics rhythm_metrics(const EpochSeries& normalized, double utc_offset_s, const NonparametricOptions& opts)
{
    NonparametricOptions o = opts;
    o.utc_offset_s = utc_offset_s;
    return {fit_cosinor(normalized, 24.0, utc_offset_s), nonparametric_metrics(normalized, o)};
}

} // namespace circadian
