#include "circadian/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace circadian {

namespace {

constexpr double kGridEps = 1e-9;

long long floor_div(double t, double len) { return static_cast<long long>(std::floor(t / len + kGridEps)); }
long long ceil_div(double t, double len) { return static_cast<long long>(std::ceil(t / len - kGridEps)); }

SampleSeries keep_where(const SampleSeries& s, const std::vector<std::uint8_t>& keep)
{
    SampleSeries out;
    out.kind = s.kind;
    out.nominal_rate_hz = s.nominal_rate_hz;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!keep[i])
            continue;
        out.t.push_back(s.t[i]);
        out.values.push_back(s.values[i]);
        if (s.has_quality())
            out.quality.push_back(s.quality[i]);
    }
    return out;
}

} // namespace

SampleSeries filter_quality(const SampleSeries& s, int min_score)
{
    if (!carries_quality(s.kind) || (!s.empty() && !s.has_quality()))
        throw Error("filter_quality: signal '" + std::string(to_string(s.kind)) + "' has no quality scores");
    std::vector<std::uint8_t> keep(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        keep[i] = s.quality[i] >= min_score;
    return keep_where(s, keep);
}

std::optional<PhysioBounds> physiological_bounds(SignalKind kind)
{
    switch (kind) {
    case SignalKind::hr: return PhysioBounds{25.0, 220.0};
    case SignalKind::rri: return PhysioBounds{273.0, 2400.0};
    case SignalKind::cbt: return PhysioBounds{34.0, 42.0};
    case SignalKind::skin_t: return PhysioBounds{20.0, 42.0};
    default: return std::nullopt;
    }
}

OutlierResult exclude_outliers(const SampleSeries& s, PhysioBounds bounds)
{
    std::vector<std::uint8_t> keep(s.size());
    std::size_t removed = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        keep[i] = s.values[i] >= bounds.lo && s.values[i] <= bounds.hi;
        removed += keep[i] ? 0 : 1;
    }
    return {keep_where(s, keep), removed};
}

OutlierResult exclude_outliers(const SampleSeries& s)
{
    const auto bounds = physiological_bounds(s.kind);
    if (!bounds)
        return {s, 0};
    return exclude_outliers(s, *bounds);
}

WearMask detect_gaps(const SampleSeries& s, double min_gap_s)
{
    std::vector<MaskInterval> raw;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s.t[i] - s.t[i - 1] >= min_gap_s)
            raw.push_back({s.t[i - 1], s.t[i], NonWearReason::charging});
    return WearMask::from_intervals(std::move(raw));
}

WearMask detect_nonwear(const SampleSeries& magnitude, const NonWearParams& params)
{
    if (params.window_s < 60.0)
        throw Error("detect_nonwear: window must be at least 60 s");
    if (magnitude.empty())
        return {};

    constexpr double block = 60.0;
    const long long b0 = floor_div(magnitude.t.front(), block);
    const long long b1 = floor_div(magnitude.t.back(), block);
    const auto nblocks = static_cast<std::size_t>(b1 - b0 + 1);

    // Per-block moments, shifted by the first sample for numerical stability.
    const double shift = magnitude.values.front();
    std::vector<double> cnt(nblocks + 1, 0.0), sum(nblocks + 1, 0.0), sq(nblocks + 1, 0.0), empty(nblocks + 1, 0.0);
    for (std::size_t i = 0; i < magnitude.size(); ++i) {
        const auto b = static_cast<std::size_t>(floor_div(magnitude.t[i], block) - b0);
        const double v = magnitude.values[i] - shift;
        cnt[b + 1] += 1.0;
        sum[b + 1] += v;
        sq[b + 1] += v * v;
    }
    for (std::size_t b = 1; b <= nblocks; ++b) {
        empty[b] = empty[b - 1] + (cnt[b] == 0.0 ? 1.0 : 0.0);
        cnt[b] += cnt[b - 1];
        sum[b] += sum[b - 1];
        sq[b] += sq[b - 1];
    }

    const auto w = static_cast<std::size_t>(std::llround(params.window_s / block));
    std::vector<MaskInterval> raw;
    for (std::size_t b = 0; b + w <= nblocks; ++b) {
        if (empty[b + w] - empty[b] > 0.0)
            continue;
        const double n = cnt[b + w] - cnt[b];
        if (n < 2.0)
            continue;
        const double s1 = sum[b + w] - sum[b];
        const double var = std::max(0.0, (sq[b + w] - sq[b] - s1 * s1 / n) / (n - 1.0));
        if (std::sqrt(var) < params.std_threshold_g) {
            const double a = static_cast<double>(b0 + static_cast<long long>(b)) * block;
            raw.push_back({a, a + static_cast<double>(w) * block, NonWearReason::zero_motion});
        }
    }
    const auto gaps = detect_gaps(magnitude, params.charging_gap_s);
    raw.insert(raw.end(), gaps.intervals().begin(), gaps.intervals().end());
    return WearMask::from_intervals(std::move(raw));
}

EpochSeries epoch_aggregate(const SampleSeries& s, double epoch_len, Aggregation agg, std::optional<TimeRange> range)
{
    if (!(epoch_len > 0.0))
        throw Error("epoch_aggregate: epoch length must be positive");
    long long g0 = 0, g1 = 0;
    if (range) {
        if (!(range->end > range->start))
            throw Error("epoch_aggregate: empty range");
        g0 = floor_div(range->start, epoch_len);
        g1 = ceil_div(range->end, epoch_len);
    } else {
        if (s.empty())
            throw Error("epoch_aggregate: empty series and no range");
        g0 = floor_div(s.t.front(), epoch_len);
        g1 = floor_div(s.t.back(), epoch_len) + 1;
    }
    EpochSeries out(static_cast<double>(g0) * epoch_len, epoch_len, static_cast<std::size_t>(g1 - g0));
    std::vector<std::size_t> count(out.size(), 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const long long g = floor_div(s.t[i], epoch_len);
        if (g < g0 || g >= g1)
            continue;
        const auto k = static_cast<std::size_t>(g - g0);
        out.values[k] += s.values[i];
        ++count[k];
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (count[k] == 0) {
            out.values[k] = 0.0;
            continue;
        }
        out.valid[k] = 1;
        if (agg == Aggregation::mean)
            out.values[k] /= static_cast<double>(count[k]);
    }
    return out;
}

EpochSeries epoch_aggregate(const EpochSeries& s, double epoch_len, Aggregation agg, std::optional<TimeRange> range)
{
    if (!(epoch_len > 0.0))
        throw Error("epoch_aggregate: epoch length must be positive");
    const double ratio = epoch_len / s.epoch_len;
    if (ratio < 1.0 - kGridEps || std::fabs(ratio - std::round(ratio)) > 1e-9)
        throw Error("epoch_aggregate: target epoch length must be a multiple of the source epoch length");
    const TimeRange r = range ? *range : s.range();
    if (!(r.end > r.start))
        throw Error("epoch_aggregate: empty range");
    const long long g0 = floor_div(r.start, epoch_len);
    const long long g1 = ceil_div(r.end, epoch_len);
    EpochSeries out(static_cast<double>(g0) * epoch_len, epoch_len, static_cast<std::size_t>(g1 - g0));
    std::vector<std::size_t> count(out.size(), 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.is_valid(i))
            continue;
        const long long g = floor_div(s.epoch_start(i), epoch_len);
        if (g < g0 || g >= g1)
            continue;
        const auto k = static_cast<std::size_t>(g - g0);
        out.values[k] += s.values[i];
        ++count[k];
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (count[k] == 0) {
            out.values[k] = 0.0;
            continue;
        }
        out.valid[k] = 1;
        if (agg == Aggregation::mean)
            out.values[k] /= static_cast<double>(count[k]);
    }
    return out;
}

EpochSeries restrict_to(const EpochSeries& s, TimeRange range)
{
    if (!(range.end > range.start))
        throw Error("restrict_to: empty range");
    const long long k0 = static_cast<long long>(std::floor((range.start - s.start) / s.epoch_len + kGridEps));
    const long long k1 = static_cast<long long>(std::ceil((range.end - s.start) / s.epoch_len - kGridEps));
    EpochSeries out(s.start + static_cast<double>(k0) * s.epoch_len, s.epoch_len, static_cast<std::size_t>(k1 - k0));
    for (long long k = std::max(k0, 0LL); k < std::min<long long>(k1, static_cast<long long>(s.size())); ++k) {
        const auto src = static_cast<std::size_t>(k);
        const auto dst = static_cast<std::size_t>(k - k0);
        out.values[dst] = s.values[src];
        out.valid[dst] = s.valid[src];
    }
    return out;
}

EpochSeries minmax_normalize(const EpochSeries& s)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.is_valid(i)) {
            lo = std::min(lo, s.values[i]);
            hi = std::max(hi, s.values[i]);
        }
    if (!(hi > lo))
        throw Error("minmax_normalize: fewer than two distinct valid values");
    EpochSeries out = s;
    const double range = hi - lo;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (out.is_valid(i))
            out.values[i] = (out.values[i] - lo) / range;
    return out;
}

AlignResult align_series(const EpochSeries& a, const EpochSeries& b, const std::vector<WearMask>& masks)
{
    const double len = a.epoch_len;
    if (std::fabs(a.epoch_len - b.epoch_len) > kGridEps * len)
        throw Error("align_series: epoch lengths differ");
    const double phase = (b.start - a.start) / len;
    if (std::fabs(phase - std::round(phase)) > 1e-6)
        throw Error("align_series: epoch grids are not aligned");
    const double start = std::max(a.start, b.start);
    const double end = std::min(a.end(), b.end());
    if (!(end > start))
        throw Error("align_series: series do not overlap in time");

    AlignResult r;
    r.a = restrict_to(a, {start, end});
    r.b = restrict_to(b, {start, end});
    r.n_epochs = r.a.size();
    std::size_t removed = 0;
    for (std::size_t i = 0; i < r.n_epochs; ++i) {
        const double t0 = r.a.epoch_start(i);
        bool masked = false;
        for (const auto& m : masks)
            masked = masked || m.overlaps(t0, t0 + len);
        const bool va = r.a.is_valid(i), vb = r.b.is_valid(i);
        if (masked || (!va && !vb))
            ++r.invalid_both;
        else if (va != vb)
            ++r.invalid_single;
        if (masked || !va || !vb) {
            r.a.invalidate(i);
            r.b.invalidate(i);
            ++removed;
        }
    }
    const auto n = static_cast<double>(r.n_epochs);
    r.removed_fraction = static_cast<double>(removed) / n;
    r.removed_both_fraction = static_cast<double>(r.invalid_both) / n;
    r.removed_single_fraction = static_cast<double>(r.invalid_single) / n;
    return r;
}

double miss_rate(const EpochSeries& s, double collection_start, double collection_end)
{
    if (!(collection_end > collection_start))
        throw Error("miss_rate: collection end must be after start");
    const long long k0 = static_cast<long long>(std::ceil((collection_start - s.start) / s.epoch_len - kGridEps));
    const long long k1 = static_cast<long long>(std::ceil((collection_end - s.start) / s.epoch_len - kGridEps));
    if (k1 <= k0)
        return 0.0;
    std::size_t missing = 0;
    for (long long k = k0; k < k1; ++k)
        if (k < 0 || k >= static_cast<long long>(s.size()) || !s.is_valid(static_cast<std::size_t>(k)))
            ++missing;
    return static_cast<double>(missing) / static_cast<double>(k1 - k0);
}

} // namespace circadian
