#include "circadian/pipeline.hpp"

#include "internal/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace circadian::pipeline {

using json = nlohmann::ordered_json;

namespace {

bool multiple_of(double big, double small)
{
    const double r = big / small;
    return r >= 1.0 - 1e-9 && std::fabs(r - std::round(r)) < 1e-9;
}

std::string mode_name(synth::ActivityMode m) { return m == synth::ActivityMode::raw ? "raw" : "counts"; }

std::string resolution_name(ProfileResolution r) { return r == ProfileResolution::hourly ? "hourly" : "ten_minute"; }

template <class T>
void read(const json& j, const char* key, T& out)
{
    if (j.contains(key) && !j[key].is_null())
        out = j[key].get<T>();
}

template <class T>
void read_opt(const json& j, const char* key, std::optional<T>& out)
{
    if (j.contains(key))
        out = j[key].is_null() ? std::nullopt : std::optional<T>(j[key].get<T>());
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

} // namespace

void RunConfig::validate() const
{
    const auto fail = [](const std::string& what) { throw Error("config: " + what); };
    if (!(counts_epoch_s > 0.0) || !multiple_of(86400.0, counts_epoch_s))
        fail("epochs.counts_s must be positive and divide a day");
    if (!multiple_of(cosinor_epoch_s, counts_epoch_s))
        fail("epochs.cosinor_s must be a multiple of epochs.counts_s");
    if (!multiple_of(nonparam_bin_s, cosinor_epoch_s) || !multiple_of(86400.0, nonparam_bin_s))
        fail("epochs.nonparam_bin_s must be a multiple of epochs.cosinor_s and divide a day");
    if (quality_threshold < 1 || quality_threshold > 4)
        fail("quality_threshold must be in [1, 4]");
    if (!(nonwear.window_s >= 60.0) || !(nonwear.std_threshold_g > 0.0) || !(nonwear.charging_gap_s > 0.0))
        fail("nonwear parameters must be positive (window_s >= 60)");
    if (exact_test_max_n > 30)
        fail("exact_test_max_n must be at most 30");
    if (!(min_days >= 1.0))
        fail("min_days must be at least 1");
    if (jobs < 0)
        fail("jobs must be non-negative");
    if (std::find(kSignals.begin(), kSignals.end(), reference_signal) == kSignals.end())
        fail("unknown reference_signal '" + reference_signal + "'");
    for (const auto& [id, off] : utc_offset_minutes)
        if (!(off >= -14 * 60.0 && off <= 14 * 60.0))
            fail("utc offset for '" + id + "' outside [-840, 840] minutes");
    if (synth.cohort != "demo" && synth.cohort != "linear")
        fail("synth.cohort must be 'demo' or 'linear'");
    if (synth.participants < 1)
        fail("synth.participants must be positive");
    if (synth.missingness && !(*synth.missingness >= 0.0 && *synth.missingness < 1.0))
        fail("synth.missingness must be in [0, 1)");
    if (synth.charging_minutes_per_day && !(*synth.charging_minutes_per_day >= 0.0 && *synth.charging_minutes_per_day <= 240.0))
        fail("synth.charging_minutes_per_day must be in [0, 240]");
}

std::string config_to_json(const RunConfig& c, bool include_paths)
{
    json j;
    j["schema_version"] = RunConfig::kSchemaVersion;
    if (include_paths) {
        j["manifest"] = c.manifest.generic_string();
        j["output_dir"] = c.output_dir.generic_string();
    }
    j["epochs"] = {{"counts_s", c.counts_epoch_s}, {"cosinor_s", c.cosinor_epoch_s}, {"nonparam_bin_s", c.nonparam_bin_s}};
    j["quality_threshold"] = c.quality_threshold;
    j["nonwear"] = {{"window_s", c.nonwear.window_s},
                    {"std_threshold_g", c.nonwear.std_threshold_g},
                    {"charging_gap_s", c.nonwear.charging_gap_s}};
    j["exact_test_max_n"] = c.exact_test_max_n;
    j["m10l5_resolution"] = resolution_name(c.m10l5);
    j["min_days"] = c.min_days;
    j["reference_signal"] = c.reference_signal;
    json offsets = json::object();
    for (const auto& [id, off] : c.utc_offset_minutes)
        offsets[id] = off;
    j["utc_offset_minutes"] = offsets;
    j["jobs"] = c.jobs;
    j["seed"] = c.seed;
    j["synth"] = {{"cohort", c.synth.cohort},
                  {"participants", c.synth.participants},
                  {"days", c.synth.days},
                  {"activity_mode", mode_name(c.synth.activity_mode)},
                  {"missingness", optional_json(c.synth.missingness)},
                  {"charging_minutes_per_day", optional_json(c.synth.charging_minutes_per_day)},
                  {"meq",
                   {{"a", c.synth.meq.a},
                    {"b", c.synth.meq.b},
                    {"sigma", c.synth.meq.sigma},
                    {"admin_sd", c.synth.meq.admin_sd},
                    {"administrations", c.synth.meq.administrations}}}};
    return j.dump(2);
}

RunConfig config_from_json(const std::string& text)
{
    RunConfig c;
    try {
        const json j = json::parse(text);
        if (!j.is_object())
            throw Error("config: expected a JSON object");
        if (j.value("schema_version", 0) != RunConfig::kSchemaVersion)
            throw Error("config: unsupported schema_version");
        if (j.contains("manifest") && !j["manifest"].is_null())
            c.manifest = j["manifest"].get<std::string>();
        if (j.contains("output_dir") && !j["output_dir"].is_null())
            c.output_dir = j["output_dir"].get<std::string>();
        if (j.contains("epochs")) {
            read(j["epochs"], "counts_s", c.counts_epoch_s);
            read(j["epochs"], "cosinor_s", c.cosinor_epoch_s);
            read(j["epochs"], "nonparam_bin_s", c.nonparam_bin_s);
        }
        read(j, "quality_threshold", c.quality_threshold);
        if (j.contains("nonwear")) {
            read(j["nonwear"], "window_s", c.nonwear.window_s);
            read(j["nonwear"], "std_threshold_g", c.nonwear.std_threshold_g);
            read(j["nonwear"], "charging_gap_s", c.nonwear.charging_gap_s);
        }
        read(j, "exact_test_max_n", c.exact_test_max_n);
        std::string res = resolution_name(c.m10l5);
        read(j, "m10l5_resolution", res);
        if (res == "hourly")
            c.m10l5 = ProfileResolution::hourly;
        else if (res == "ten_minute")
            c.m10l5 = ProfileResolution::ten_minute;
        else
            throw Error("config: m10l5_resolution must be 'ten_minute' or 'hourly'");
        read(j, "min_days", c.min_days);
        read(j, "reference_signal", c.reference_signal);
        if (j.contains("utc_offset_minutes"))
            for (const auto& [id, off] : j["utc_offset_minutes"].items())
                c.utc_offset_minutes[id] = off.get<double>();
        read(j, "jobs", c.jobs);
        read(j, "seed", c.seed);
        if (j.contains("synth")) {
            const json& sj = j["synth"];
            read(sj, "cohort", c.synth.cohort);
            read(sj, "participants", c.synth.participants);
            read(sj, "days", c.synth.days);
            std::string mode = mode_name(c.synth.activity_mode);
            read(sj, "activity_mode", mode);
            if (mode == "raw")
                c.synth.activity_mode = synth::ActivityMode::raw;
            else if (mode == "counts")
                c.synth.activity_mode = synth::ActivityMode::counts;
            else
                throw Error("config: synth.activity_mode must be 'counts' or 'raw'");
            read_opt(sj, "missingness", c.synth.missingness);
            read_opt(sj, "charging_minutes_per_day", c.synth.charging_minutes_per_day);
            if (sj.contains("meq")) {
                read(sj["meq"], "a", c.synth.meq.a);
                read(sj["meq"], "b", c.synth.meq.b);
                read(sj["meq"], "sigma", c.synth.meq.sigma);
                read(sj["meq"], "admin_sd", c.synth.meq.admin_sd);
                read(sj["meq"], "administrations", c.synth.meq.administrations);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    RunConfig c = config_from_json(detail::read_file(path));
    const auto base = path.parent_path();
    if (!c.manifest.empty() && c.manifest.is_relative())
        c.manifest = base / c.manifest;
    if (c.output_dir.is_relative())
        c.output_dir = base / c.output_dir;
    return c;
}

} // namespace circadian::pipeline
