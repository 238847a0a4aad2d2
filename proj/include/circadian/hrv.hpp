#pragma once

#include "circadian/series.hpp"

#include <span>
#include <vector>

namespace circadian {

struct HrvParams {
    double window_s = 600.0;
    std::size_t min_beats = 30;
    double pnn_threshold_ms = 50.0;
};

/// Time-domain statistics of one set of consecutive R-R intervals.
struct HrvStats {
    double mean_rr = 0.0;
    double sdnn = 0.0;  // sample sd, n-1
    double rmssd = 0.0; // successive differences within the set only
    double pnn50 = 0.0; // fraction of successive pairs with |diff| > threshold
    std::size_t n_intervals = 0;
};

/// Requires at least two intervals.
HrvStats hrv_stats(std::span<const double> rri_ms, double pnn_threshold_ms = 50.0);

struct HrvWindow {
    double start = 0.0;
    double duration = 600.0;
    std::size_t n_intervals = 0;
    bool valid = false; // n_intervals >= min_beats
    HrvStats stats;
};

/// Windows on the absolute grid of multiples of params.window_s, from the first
/// beat's window to the last; sparse windows are returned invalid.
std::vector<HrvWindow> compute_hrv_windows(const SampleSeries& rri, const HrvParams& params = {});

enum class HrvMetric { mean_rr, sdnn, rmssd, pnn50 };

EpochSeries hrv_series(const std::vector<HrvWindow>& windows, HrvMetric metric);

} // namespace circadian
