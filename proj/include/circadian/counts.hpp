#pragma once

#include "circadian/ingest.hpp"
#include "circadian/series.hpp"

#include <array>
#include <span>

namespace circadian {

/// Constants of the count-generation pipeline. Defaults follow the open
/// description of the reference device's algorithm.
struct CountsParams {
    double sample_hz = 30.0;
    double passband_lo_hz = 0.29;
    double passband_hi_hz = 1.63;
    double clip_g = 2.13;
    double deadband_g = 0.068;
    double quantum_g = 1.0 / 128.0;
    int decimation = 3; // 30 Hz -> 10 Hz
    double epoch_s = 60.0;
};

/// Direct-form-II-transposed biquad.
struct Biquad {
    double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
    double z1 = 0, z2 = 0;

    double step(double x)
    {
        const double y = b0 * x + z1;
        z1 = b1 * x - a1 * y + z2;
        z2 = b2 * x - a2 * y;
        return y;
    }
    /// Sets the state to the steady state for a constant input x; returns the steady output.
    double settle(double x);
    double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

/// Order-4 band-pass: Butterworth high-pass biquad followed by a Butterworth low-pass biquad.
class BandPass {
public:
    BandPass(double fs_hz, double lo_hz, double hi_hz);

    double step(double x) { return stages_[1].step(stages_[0].step(x)); }
    void settle(double x) { stages_[1].settle(stages_[0].settle(x)); }
    void reset() { settle(0.0); }

    /// Magnitude response at f_hz.
    double gain(double f_hz) const;

private:
    std::array<Biquad, 2> stages_;
    double fs_;
};

/// Linear interpolation onto the absolute grid t = k / target_hz. Grid points
/// whose bracketing samples are more than max_gap_s apart are omitted.
SampleSeries resample_accel(const SampleSeries& s, double target_hz, double max_gap_s = 1.0);

/// Per-minute activity counts of one axis already resampled to params.sample_hz.
/// A minute is valid only when every grid sample in it is present.
EpochSeries compute_activity_counts(const SampleSeries& axis, const CountsParams& params = {});

/// Per-epoch rounded Euclidean norm; invalid if any axis is invalid.
EpochSeries vector_magnitude(const EpochSeries& x, const EpochSeries& y, const EpochSeries& z);

struct AxisCounts {
    EpochSeries x, y, z, vm;
};

/// resample_accel + compute_activity_counts on each axis + vector_magnitude.
AxisCounts counts_from_accel(const AccelTriple& raw, const CountsParams& params = {});

} // namespace circadian
