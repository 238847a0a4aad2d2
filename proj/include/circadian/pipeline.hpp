#pragma once

#include "circadian/ingest.hpp"
#include "circadian/manifest.hpp"
#include "circadian/rhythm.hpp"
#include "circadian/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace circadian::pipeline {

/// Analysed signals, reference first.
inline const std::vector<std::string> kSignals = {"ActiAC", "WatchAC", "CBT",  "SkinT", "HR",
                                                  "MeanRR", "SDNN",    "RMSSD", "pNN50"};
inline const std::vector<std::string> kMetrics = {"mesor", "amplitude", "acrophase", "IS", "IV", "M10", "L5", "RA"};
/// Acrophase predictors of MEQ.
inline const std::vector<std::string> kChronotypeFeatures = {"ActiAC", "WatchAC", "CBT", "SkinT",
                                                             "HR",     "MeanRR",  "RMSSD"};

struct SynthSettings {
    std::string cohort = "demo"; // "demo" or "linear"
    std::size_t participants = 36; // linear cohort only
    int days = 14;
    synth::ActivityMode activity_mode = synth::ActivityMode::counts;
    std::optional<double> missingness;
    std::optional<double> charging_minutes_per_day;
    synth::MeqModel meq;
};

struct RunConfig {
    static constexpr int kSchemaVersion = 1;

    std::filesystem::path manifest;
    std::filesystem::path output_dir = "out";
    double counts_epoch_s = 60.0;
    double cosinor_epoch_s = 600.0;
    double nonparam_bin_s = 3600.0;
    int quality_threshold = 2;
    NonWearParams nonwear;
    std::size_t exact_test_max_n = 25;
    ProfileResolution m10l5 = ProfileResolution::ten_minute;
    double min_days = 2.0;
    std::string reference_signal = "ActiAC";
    /// Per-participant overrides of the manifest's UTC offset.
    std::map<std::string, double> utc_offset_minutes;
    int jobs = 0;
    std::uint64_t seed = 1;
    SynthSettings synth;

    /// Throws when a field is outside its documented range.
    void validate() const;
};

/// JSON form; relative paths are kept as written. `include_paths` false drops
/// manifest/output_dir (used in run summaries so they do not depend on locations).
std::string config_to_json(const RunConfig& c, bool include_paths = true);
RunConfig config_from_json(const std::string& text);
/// Reads a config file; relative manifest/output paths resolve against its directory.
RunConfig load_config(const std::filesystem::path& path);

struct CountsAlignment {
    std::size_t n_epochs = 0;
    double removed_both_fraction = 0.0;
    double removed_single_fraction = 0.0;
};

/// Everything the commands need from one participant.
struct ParticipantData {
    std::string id;
    double utc_offset_s = 0.0;
    double collection_start = 0.0;
    double collection_end = 0.0;
    /// Per-minute counts after alignment (ActiAC / WatchAC when present).
    std::map<std::string, EpochSeries> minute;
    /// Cosinor-epoch series per analysed signal (not normalised).
    std::map<std::string, EpochSeries> epochs;
    std::optional<CountsAlignment> alignment;
    /// Device -> miss rate over the collection period.
    std::map<std::string, double> miss_rates;
    std::vector<std::string> notices;
    std::vector<std::filesystem::path> inputs;
};

ParticipantData prepare_participant(const Manifest& m, const ParticipantEntry& p, const RunConfig& cfg);

/// The eight metrics of one signal keyed as in kMetrics; undefined values are nullopt.
std::map<std::string, std::optional<double>> metric_values(const RhythmMetrics& r);

struct CommandReport {
    std::vector<std::filesystem::path> outputs; // relative to the output directory
    std::vector<std::string> notices;
};

CommandReport cmd_synth(const RunConfig& cfg);
CommandReport cmd_metrics(const RunConfig& cfg);
CommandReport cmd_agreement(const RunConfig& cfg, const std::string& signal_a, const std::string& signal_b);
CommandReport cmd_chronotype(const RunConfig& cfg);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

} // namespace circadian::pipeline
