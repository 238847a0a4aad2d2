#include "circadian/counts.hpp"
#include "circadian/hrv.hpp"
#include "circadian/pipeline.hpp"

#include <fmt/format.h>

namespace circadian::pipeline {

namespace {

/// Records an input for hashing; unreadable paths are reported as notices instead.
void track(ParticipantData& out, const std::filesystem::path& path)
{
    if (std::filesystem::is_regular_file(path))
        out.inputs.push_back(path);
}

struct CountsSource {
    EpochSeries minute;
    std::optional<WearMask> nonwear;
};

std::optional<CountsSource> load_device_counts(const Manifest& m, const ParticipantEntry& p, const RunConfig& cfg,
                                               const char* counts_key, const char* accel_key, TimeRange range,
                                               ParticipantData& out)
{
    if (const auto path = m.signal_path(p, counts_key)) {
        track(out, *path);
        return CountsSource{restrict_to(load_counts(*path), range), std::nullopt};
    }
    if (const auto path = m.signal_path(p, accel_key)) {
        track(out, *path);
        const auto loaded = load_accel(*path);
        CountsParams params;
        params.epoch_s = cfg.counts_epoch_s;
        const auto counts = counts_from_accel(loaded.accel, params);
        return CountsSource{restrict_to(counts.vm, range),
                            detect_nonwear(accel_magnitude(loaded.accel), cfg.nonwear)};
    }
    return std::nullopt;
}

} // namespace

ParticipantData prepare_participant(const Manifest& m, const ParticipantEntry& p, const RunConfig& cfg)
{
    ParticipantData out;
    out.id = p.id;
    const auto override_it = cfg.utc_offset_minutes.find(p.id);
    out.utc_offset_s = (override_it != cfg.utc_offset_minutes.end() ? override_it->second : p.utc_offset_minutes) * 60.0;
    out.collection_start = p.collection_start_s();
    out.collection_end = p.collection_end_s();
    const TimeRange range{out.collection_start, out.collection_end};
    const auto notice = [&](const std::string& what) { out.notices.push_back(p.id + ": " + what); };
    const auto to_epochs = [&](const EpochSeries& minute) {
        return epoch_aggregate(minute, cfg.cosinor_epoch_s, Aggregation::mean, range);
    };

    // Activity counts from both devices, aligned on their common valid minutes.
    std::optional<CountsSource> acti, watch;
    try {
        acti = load_device_counts(m, p, cfg, signal_key::acti_counts, signal_key::acti_accel, range, out);
    } catch (const Error& e) {
        notice(std::string("ActiAC unavailable: ") + e.what());
    }
    try {
        watch = load_device_counts(m, p, cfg, signal_key::watch_counts, signal_key::watch_accel, range, out);
    } catch (const Error& e) {
        notice(std::string("WatchAC unavailable: ") + e.what());
    }
    if (acti)
        out.miss_rates["actigraph"] = miss_rate(acti->minute, range.start, range.end);
    if (watch)
        out.miss_rates["watch"] = miss_rate(watch->minute, range.start, range.end);
    if (acti && watch) {
        std::vector<WearMask> masks;
        for (const auto* src : {&*acti, &*watch})
            if (src->nonwear)
                masks.push_back(*src->nonwear);
        const auto aligned = align_series(acti->minute, watch->minute, masks);
        out.alignment = CountsAlignment{aligned.n_epochs, aligned.removed_both_fraction,
                                        aligned.removed_single_fraction};
        out.minute.emplace("ActiAC", aligned.a);
        out.minute.emplace("WatchAC", aligned.b);
    } else {
        for (auto [name, src] : {std::pair{"ActiAC", &acti}, std::pair{"WatchAC", &watch}}) {
            if (!*src) {
                notice(std::string(name) + " missing");
                continue;
            }
            EpochSeries s = (*src)->minute;
            if ((*src)->nonwear)
                apply_mask(s, *(*src)->nonwear);
            out.minute.emplace(name, std::move(s));
        }
    }
    for (const auto& [name, s] : out.minute)
        out.epochs.emplace(name, to_epochs(s));

    if (const auto path = m.signal_path(p, signal_key::hr)) {
        try {
            track(out, *path);
            const auto hr = exclude_outliers(load_signal(*path, SignalKind::hr).series).series;
            out.epochs.emplace("HR", epoch_aggregate(hr, cfg.cosinor_epoch_s, Aggregation::mean, range));
            if (!watch)
                out.miss_rates["watch"] =
                    miss_rate(epoch_aggregate(hr, cfg.counts_epoch_s, Aggregation::mean, range), range.start, range.end);
        } catch (const Error& e) {
            notice(std::string("HR unavailable: ") + e.what());
        }
    } else {
        notice("HR missing");
    }

    if (const auto path = m.signal_path(p, signal_key::temperature)) {
        track(out, *path);
        for (auto [name, kind] : {std::pair{"CBT", SignalKind::cbt}, std::pair{"SkinT", SignalKind::skin_t}}) {
            try {
                const auto raw = load_signal(*path, kind).series;
                if (kind == SignalKind::cbt)
                    out.miss_rates["temperature"] = miss_rate(
                        epoch_aggregate(raw, cfg.counts_epoch_s, Aggregation::mean, range), range.start, range.end);
                const auto clean = exclude_outliers(filter_quality(raw, cfg.quality_threshold)).series;
                out.epochs.emplace(name, epoch_aggregate(clean, cfg.cosinor_epoch_s, Aggregation::mean, range));
            } catch (const Error& e) {
                notice(std::string(name) + " unavailable: " + e.what());
            }
        }
    } else {
        notice("CBT and SkinT missing");
    }

    if (const auto path = m.signal_path(p, signal_key::rri)) {
        try {
            track(out, *path);
            const auto rri = exclude_outliers(load_signal(*path, SignalKind::rri).series).series;
            HrvParams params;
            params.window_s = cfg.cosinor_epoch_s;
            const auto windows = compute_hrv_windows(rri, params);
            const std::pair<const char*, HrvMetric> metrics[] = {{"MeanRR", HrvMetric::mean_rr},
                                                                 {"SDNN", HrvMetric::sdnn},
                                                                 {"RMSSD", HrvMetric::rmssd},
                                                                 {"pNN50", HrvMetric::pnn50}};
            for (const auto& [name, metric] : metrics)
                out.epochs.emplace(name, restrict_to(hrv_series(windows, metric), range));
        } catch (const Error& e) {
            notice(std::string("R-R intervals unavailable: ") + e.what());
        }
    } else {
        notice("R-R intervals missing");
    }
    return out;
}

std::map<std::string, std::optional<double>> metric_values(const RhythmMetrics& r)
{
    std::map<std::string, std::optional<double>> v;
    v["mesor"] = r.cosinor.mesor;
    v["amplitude"] = r.cosinor.amplitude;
    v["acrophase"] = r.cosinor.acrophase_defined ? std::optional<double>(r.cosinor.acrophase_hours) : std::nullopt;
    v["IS"] = r.nonparametric.is;
    v["IV"] = r.nonparametric.iv;
    v["M10"] = r.nonparametric.m10;
    v["L5"] = r.nonparametric.l5;
    v["RA"] = r.nonparametric.ra;
    return v;
}

} // namespace circadian::pipeline
