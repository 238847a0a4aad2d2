#pragma once

#include "circadian/series.hpp"

#include <optional>

namespace circadian {

/// One-component cosinor y = M + A cos(2 pi t / tau + phi).
struct CosinorFit {
    double mesor = 0.0;
    double amplitude = 0.0;
    /// Local clock hour of the fitted peak, in [0, 24). Meaningless when !acrophase_defined.
    double acrophase_hours = 0.0;
    double phi_radians = 0.0; // (-pi, pi]
    bool acrophase_defined = false;
    double r_squared = 0.0;
    double sse = 0.0;
    std::size_t n_points = 0;
};

/// Angle 2*pi*t/period of a unix time in local clock terms, reduced to [0, 2*pi).
double local_angle(double t_unix_s, double utc_offset_s, double period_hours = 24.0);

/// Least-squares cosinor on the valid epochs, each placed at its midpoint.
/// Requires >= 3 valid epochs covering >= one period.
CosinorFit fit_cosinor(const EpochSeries& s, double period_hours = 24.0, double utc_offset_s = 0.0);

/// Sum of squared residuals of a given (mesor, amplitude, acrophase) over the valid epochs.
double cosinor_sse(const EpochSeries& s, double mesor, double amplitude, double acrophase_hours,
                   double period_hours = 24.0, double utc_offset_s = 0.0);

enum class ProfileResolution { ten_minute, hourly };

struct NonparametricOptions {
    /// Bin width for IS/IV.
    double bin_s = 3600.0;
    /// Start-time grid of the M10/L5 windows on the average day.
    ProfileResolution m10l5 = ProfileResolution::ten_minute;
    double utc_offset_s = 0.0;
    /// Full days of data required.
    double min_days = 2.0;
};

struct NonparametricMetrics {
    std::optional<double> is; // undefined for zero variance
    std::optional<double> iv;
    double m10 = 0.0;
    double l5 = 0.0;
    double m10_start_hours = 0.0;
    double l5_start_hours = 0.0;
    std::optional<double> ra; // undefined when m10 + l5 == 0
};

/// IS/IV on hourly bins; M10/L5/RA on the average 24 h profile with wrap-around windows.
NonparametricMetrics nonparametric_metrics(const EpochSeries& s, const NonparametricOptions& opts = {});

struct RhythmMetrics {
    CosinorFit cosinor;
    NonparametricMetrics nonparametric;
};

/// Both families on one normalized 10-minute series.
RhythmMetrics rhythm_metrics(const EpochSeries& normalized, double utc_offset_s,
                             const NonparametricOptions& opts = {});

} // namespace circadian
