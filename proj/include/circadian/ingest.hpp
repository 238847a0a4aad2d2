#pragma once

#include "circadian/series.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace circadian {

// ---------------------------------------------------------------------------
// CSV loading
//
// Accepted files (header row required):
//   accel        t_unix_ms,x_g,y_g,z_g
//   rri          t_unix_ms,rri_ms
//   hr           t_unix_ms,bpm
//   temperature  t_unix_ms,cbt_c,skin_c,quality
//   counts       t_unix_ms,counts
// ---------------------------------------------------------------------------

struct LoadOptions {
    /// Throw on the first malformed row instead of skipping it.
    bool strict = false;
};

struct LoadReport {
    std::size_t rows_read = 0;
    std::size_t rows_dropped = 0;       // unparsable rows
    std::size_t duplicates_dropped = 0; // repeated timestamps, first occurrence kept
    std::vector<std::size_t> bad_lines; // 1-based file line numbers
};

struct LoadedSignal {
    SampleSeries series;
    LoadReport report;
};

/// Loads one signal. Acceleration axes come from the accel schema, cbt/skin_t
/// from the temperature schema (with quality).
LoadedSignal load_signal(const std::filesystem::path& path, SignalKind kind, const LoadOptions& opts = {});

struct AccelTriple {
    SampleSeries x, y, z;
};

struct LoadedAccel {
    AccelTriple accel;
    LoadReport report;
};

LoadedAccel load_accel(const std::filesystem::path& path, const LoadOptions& opts = {});

/// Per-minute counts file; missing minutes come back invalid.
EpochSeries load_counts(const std::filesystem::path& path, const LoadOptions& opts = {});
void write_counts(const std::filesystem::path& path, const EpochSeries& counts);

/// Sample-by-sample Euclidean norm of the three axes (identical timestamps required).
SampleSeries accel_magnitude(const AccelTriple& accel);

// ---------------------------------------------------------------------------
// Quality, outliers and non-wear
// ---------------------------------------------------------------------------

/// Keeps samples with quality >= min_score.
SampleSeries filter_quality(const SampleSeries& s, int min_score);

struct PhysioBounds {
    double lo;
    double hi;
};

/// Plausibility bounds; nullopt for signals without bounds (acceleration).
std::optional<PhysioBounds> physiological_bounds(SignalKind kind);

struct OutlierResult {
    SampleSeries series;
    std::size_t removed = 0;
};

OutlierResult exclude_outliers(const SampleSeries& s);
OutlierResult exclude_outliers(const SampleSeries& s, PhysioBounds bounds);

struct NonWearParams {
    double window_s = 1800.0;
    double std_threshold_g = 0.013;
    double charging_gap_s = 300.0;
};

/// Flags zero-motion windows (vector-magnitude sd below threshold over a full
/// rolling window) and charging gaps (timestamp gaps >= charging_gap_s).
WearMask detect_nonwear(const SampleSeries& magnitude, const NonWearParams& params = {});

/// Timestamp gaps >= min_gap_s as charging intervals [t_i, t_{i+1}).
WearMask detect_gaps(const SampleSeries& s, double min_gap_s);

// ---------------------------------------------------------------------------
// Epochs
// ---------------------------------------------------------------------------

enum class Aggregation { mean, sum };

/// Aggregates onto a grid aligned to multiples of epoch_len. Without a range the
/// grid spans the data; with one it spans [floor(start), ceil(end)).
EpochSeries epoch_aggregate(const SampleSeries& s, double epoch_len, Aggregation agg,
                            std::optional<TimeRange> range = std::nullopt);
EpochSeries epoch_aggregate(const EpochSeries& s, double epoch_len, Aggregation agg,
                            std::optional<TimeRange> range = std::nullopt);

/// Re-grids s onto the epochs covering range (same epoch length); epochs outside s are invalid.
EpochSeries restrict_to(const EpochSeries& s, TimeRange range);

/// (x - min) / (max - min) over valid epochs.
EpochSeries minmax_normalize(const EpochSeries& s);

struct AlignResult {
    EpochSeries a;
    EpochSeries b;
    std::size_t n_epochs = 0;
    std::size_t invalid_both = 0;   // invalid in both inputs or masked
    std::size_t invalid_single = 0; // invalid in exactly one input, not masked
    double removed_fraction = 0.0;  // invalid epochs in the output grid
    double removed_both_fraction = 0.0;
    double removed_single_fraction = 0.0;
};

/// Puts a and b on their common grid; an epoch survives iff valid in both and
/// outside every mask.
AlignResult align_series(const EpochSeries& a, const EpochSeries& b, const std::vector<WearMask>& masks = {});

/// Fraction of expected epochs in [start, end) that are invalid or absent.
double miss_rate(const EpochSeries& s, double collection_start, double collection_end);

} // namespace circadian
