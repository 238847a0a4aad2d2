#include "circadian/series.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

namespace circadian {

namespace {

constexpr std::array<std::pair<SignalKind, std::string_view>, 8> kKindNames{{
    {SignalKind::accel_x, "accel_x"},
    {SignalKind::accel_y, "accel_y"},
    {SignalKind::accel_z, "accel_z"},
    {SignalKind::accel_vm, "accel_vm"},
    {SignalKind::rri, "rri"},
    {SignalKind::hr, "hr"},
    {SignalKind::cbt, "cbt"},
    {SignalKind::skin_t, "skin_t"},
}};

int priority(NonWearReason r)
{
    switch (r) {
    case NonWearReason::charging: return 3;
    case NonWearReason::quality: return 2;
    case NonWearReason::outlier: return 1;
    case NonWearReason::zero_motion: return 0;
    }
    return 0;
}

} // namespace

std::string_view to_string(SignalKind kind)
{
    for (const auto& [k, name] : kKindNames)
        if (k == kind)
            return name;
    return "unknown";
}

SignalKind signal_kind_from_string(std::string_view name)
{
    for (const auto& [k, n] : kKindNames)
        if (n == name)
            return k;
    throw Error("unknown signal kind '" + std::string(name) + "'");
}

std::string_view to_string(NonWearReason reason)
{
    switch (reason) {
    case NonWearReason::charging: return "charging";
    case NonWearReason::zero_motion: return "zero_motion";
    case NonWearReason::outlier: return "outlier";
    case NonWearReason::quality: return "quality";
    }
    return "unknown";
}

void SampleSeries::validate() const
{
    if (t.size() != values.size())
        throw Error("sample series: timestamp/value length mismatch");
    if (carries_quality(kind) != !quality.empty() && !t.empty())
        throw Error("sample series: quality present iff signal is a temperature");
    if (!quality.empty() && quality.size() != t.size())
        throw Error("sample series: quality length mismatch");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(values[i]) || !std::isfinite(t[i]))
            throw Error("sample series: non-finite sample at index " + std::to_string(i));
        if (i > 0 && !(t[i] > t[i - 1]))
            throw Error("sample series: timestamps not strictly increasing at index " + std::to_string(i));
    }
}

std::size_t EpochSeries::valid_count() const
{
    return static_cast<std::size_t>(std::count_if(valid.begin(), valid.end(), [](auto v) { return v != 0; }));
}

void EpochSeries::validate() const
{
    if (values.size() != valid.size())
        throw Error("epoch series: values/valid length mismatch");
    if (!(epoch_len > 0.0))
        throw Error("epoch series: epoch length must be positive");
}

WearMask WearMask::from_intervals(std::vector<MaskInterval> raw)
{
    std::erase_if(raw, [](const MaskInterval& iv) { return !(iv.end > iv.start); });
    WearMask mask;
    if (raw.empty())
        return mask;

    // Elementary segments between all boundaries, each labelled by the
    // highest-priority interval covering it.
    std::vector<double> cuts;
    cuts.reserve(raw.size() * 2);
    for (const auto& iv : raw) {
        cuts.push_back(iv.start);
        cuts.push_back(iv.end);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    std::multimap<double, const MaskInterval*> active; // keyed by end
    std::size_t next = 0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double a = cuts[c], b = cuts[c + 1];
        while (next < raw.size() && raw[next].start <= a) {
            active.emplace(raw[next].end, &raw[next]);
            ++next;
        }
        while (!active.empty() && active.begin()->first <= a)
            active.erase(active.begin());
        if (active.empty())
            continue;
        NonWearReason best = active.begin()->second->reason;
        for (const auto& [end, iv] : active)
            if (priority(iv->reason) > priority(best))
                best = iv->reason;
        auto& out = mask.intervals_;
        if (!out.empty() && out.back().end == a && out.back().reason == best)
            out.back().end = b;
        else
            out.push_back({a, b, best});
    }
    return mask;
}

bool WearMask::overlaps(double a, double b) const
{
    // First interval whose end is beyond a.
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), a,
                               [](double v, const MaskInterval& iv) { return v < iv.end; });
    return it != intervals_.end() && it->start < b;
}

double WearMask::total_duration() const
{
    double total = 0.0;
    for (const auto& iv : intervals_)
        total += iv.end - iv.start;
    return total;
}

WearMask WearMask::merged_with(const WearMask& other) const
{
    std::vector<MaskInterval> all = intervals_;
    all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
    return from_intervals(std::move(all));
}

EpochSeries apply_mask(EpochSeries s, const WearMask& mask)
{
    if (mask.empty())
        return s;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.is_valid(i) && mask.overlaps(s.epoch_start(i), s.epoch_start(i) + s.epoch_len))
            s.invalidate(i);
    return s;
}

} // namespace circadian
