#include "circadian/counts.hpp"
#include "internal/parallel.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace circadian {

namespace {

Biquad butterworth(double fs, double f0, bool highpass)
{
    const double w0 = 2.0 * std::numbers::pi * f0 / fs;
    const double c = std::cos(w0);
    const double alpha = std::sin(w0) / (2.0 * std::numbers::sqrt2 / 2.0);
    const double a0 = 1.0 + alpha;
    Biquad q;
    if (highpass) {
        q.b0 = (1.0 + c) / 2.0 / a0;
        q.b1 = -2.0 * q.b0; // exact zero DC gain
    } else {
        q.b0 = (1.0 - c) / 2.0 / a0;
        q.b1 = 2.0 * q.b0;
    }
    q.b2 = q.b0;
    q.a1 = -2.0 * c / a0;
    q.a2 = (1.0 - alpha) / a0;
    return q;
}

} // namespace

double Biquad::settle(double x)
{
    const double y = dc_gain() * x;
    z2 = b2 * x - a2 * y;
    z1 = b1 * x - a1 * y + z2;
    return y;
}

BandPass::BandPass(double fs_hz, double lo_hz, double hi_hz)
    : stages_{butterworth(fs_hz, lo_hz, true), butterworth(fs_hz, hi_hz, false)}, fs_(fs_hz)
{
    if (!(lo_hz > 0.0 && hi_hz > lo_hz && hi_hz < fs_hz / 2.0))
        throw Error("BandPass: require 0 < lo < hi < fs/2");
}

double BandPass::gain(double f_hz) const
{
    const std::complex<double> z = std::polar(1.0, -2.0 * std::numbers::pi * f_hz / fs_);
    std::complex<double> h = 1.0;
    for (const auto& q : stages_)
        h *= (q.b0 + q.b1 * z + q.b2 * z * z) / (1.0 + q.a1 * z + q.a2 * z * z);
    return std::abs(h);
}

SampleSeries resample_accel(const SampleSeries& s, double target_hz, double max_gap_s)
{
    if (!(target_hz > 0.0))
        throw Error("resample_accel: target rate must be positive");
    if (s.nominal_rate_hz && !(*s.nominal_rate_hz > 0.0))
        throw Error("resample_accel: source rate must be positive");
    SampleSeries out;
    out.kind = s.kind;
    out.nominal_rate_hz = target_hz;
    if (s.size() < 2)
        return out;

    const auto k0 = static_cast<long long>(std::ceil(s.t.front() * target_hz - 1e-9));
    const auto k1 = static_cast<long long>(std::floor(s.t.back() * target_hz + 1e-9));
    out.t.reserve(static_cast<std::size_t>(std::max(0LL, k1 - k0 + 1)));
    out.values.reserve(out.t.capacity());
    std::size_t j = 0;
    for (long long k = k0; k <= k1; ++k) {
        const double t = static_cast<double>(k) / target_hz;
        while (j + 2 < s.size() && s.t[j + 1] <= t)
            ++j;
        const double ta = s.t[j], tb = s.t[j + 1];
        double v = 0.0;
        if (t <= ta) {
            v = s.values[j];
        } else if (t >= tb) {
            v = s.values[j + 1];
        } else {
            if (tb - ta > max_gap_s)
                continue;
            const double w = (t - ta) / (tb - ta);
            v = s.values[j] + w * (s.values[j + 1] - s.values[j]);
        }
        out.t.push_back(t);
        out.values.push_back(v);
    }
    return out;
}

EpochSeries compute_activity_counts(const SampleSeries& axis, const CountsParams& p)
{
    if (!axis.nominal_rate_hz || std::fabs(*axis.nominal_rate_hz - p.sample_hz) > 1e-6)
        throw Error("compute_activity_counts: input must be sampled at " + std::to_string(p.sample_hz) +
                    " Hz; call resample_accel first");
    const double spm_d = p.epoch_s * p.sample_hz;
    const auto spm = static_cast<long long>(std::llround(spm_d));
    if (std::fabs(spm_d - static_cast<double>(spm)) > 1e-9 || spm % p.decimation != 0)
        throw Error("compute_activity_counts: epoch must hold a whole number of decimation groups");
    if (axis.empty())
        return {};

    std::vector<long long> k(axis.size());
    for (std::size_t i = 0; i < axis.size(); ++i) {
        const double kd = axis.t[i] * p.sample_hz;
        k[i] = std::llround(kd);
        if (std::fabs(kd - static_cast<double>(k[i])) > 1e-3)
            throw Error("compute_activity_counts: samples are not on the resampling grid");
    }
    const auto minute_of = [spm](long long idx) { return idx >= 0 ? idx / spm : -((-idx + spm - 1) / spm); };
    const long long m0 = minute_of(k.front());
    const long long m1 = minute_of(k.back());
    EpochSeries out(static_cast<double>(m0) * p.epoch_s, p.epoch_s, static_cast<std::size_t>(m1 - m0 + 1));
    std::vector<long long> present(out.size(), 0);

    BandPass filter(p.sample_hz, p.passband_lo_hz, p.passband_hi_hz);
    const double dec = static_cast<double>(p.decimation);
    long long group = std::numeric_limits<long long>::min();
    double group_sum = 0.0;
    std::size_t group_minute = 0;
    const auto flush = [&] {
        if (group != std::numeric_limits<long long>::min())
            out.values[group_minute] += group_sum / dec;
        group_sum = 0.0;
    };

    for (std::size_t i = 0; i < axis.size(); ++i) {
        if (i == 0 || k[i] != k[i - 1] + 1)
            filter.settle(axis.values[i]);
        double a = std::fabs(filter.step(axis.values[i]));
        a = std::min(a, p.clip_g);
        if (a < p.deadband_g)
            a = 0.0;
        const double q = std::floor(a / p.quantum_g);

        const long long g = k[i] >= 0 ? k[i] / p.decimation : -((-k[i] + p.decimation - 1) / p.decimation);
        if (g != group) {
            flush();
            group = g;
            group_minute = static_cast<std::size_t>(minute_of(k[i]) - m0);
        }
        group_sum += q;
        ++present[static_cast<std::size_t>(minute_of(k[i]) - m0)];
    }
    flush();

    for (std::size_t m = 0; m < out.size(); ++m) {
        if (present[m] == spm)
            out.set(m, std::round(out.values[m]));
        else
            out.values[m] = 0.0;
    }
    return out;
}

EpochSeries vector_magnitude(const EpochSeries& x, const EpochSeries& y, const EpochSeries& z)
{
    const auto same_grid = [](const EpochSeries& a, const EpochSeries& b) {
        return a.size() == b.size() && a.start == b.start && a.epoch_len == b.epoch_len;
    };
    if (!same_grid(x, y) || !same_grid(x, z))
        throw Error("vector_magnitude: axes are on different epoch grids");
    EpochSeries out(x.start, x.epoch_len, x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x.is_valid(i) && y.is_valid(i) && z.is_valid(i))
            out.set(i, std::round(std::sqrt(x.values[i] * x.values[i] + y.values[i] * y.values[i] +
                                            z.values[i] * z.values[i])));
    return out;
}

AxisCounts counts_from_accel(const AccelTriple& raw, const CountsParams& params)
{
    const std::array<const SampleSeries*, 3> in{&raw.x, &raw.y, &raw.z};
    std::array<EpochSeries, 3> axes;
    detail::parallel_for(3, 3, [&](std::size_t a) {
        axes[a] = compute_activity_counts(resample_accel(*in[a], params.sample_hz), params);
    });

    // Axes share timestamps, so their grids match unless one resampled empty.
    AxisCounts out{axes[0], axes[1], axes[2], {}};
    out.vm = vector_magnitude(out.x, out.y, out.z);
    return out;
}

} // namespace circadian
