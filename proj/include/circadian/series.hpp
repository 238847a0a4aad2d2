#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace circadian {

/// Thrown for every precondition violation or malformed input in the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SignalKind { accel_x, accel_y, accel_z, accel_vm, rri, hr, cbt, skin_t };

std::string_view to_string(SignalKind kind);
SignalKind signal_kind_from_string(std::string_view name);

inline bool carries_quality(SignalKind kind)
{
    return kind == SignalKind::cbt || kind == SignalKind::skin_t;
}

/// Timestamped samples of one physical signal. Times are seconds since the unix epoch.
struct SampleSeries {
    SignalKind kind = SignalKind::hr;
    std::vector<double> t;
    std::vector<double> values;
    /// Empty optional means event based (R-R intervals).
    std::optional<double> nominal_rate_hz;
    /// Per-sample quality score 1..4; non-empty iff carries_quality(kind).
    std::vector<int> quality;

    std::size_t size() const { return t.size(); }
    bool empty() const { return t.empty(); }
    bool has_quality() const { return !quality.empty(); }

    /// Throws Error when an invariant does not hold.
    void validate() const;
};

struct TimeRange {
    double start = 0.0;
    double end = 0.0;
    double length() const { return end - start; }
};

/// Uniform-epoch aggregate with an explicit validity mask. The value stored
/// in an invalid epoch is unspecified and never read.
struct EpochSeries {
    double start = 0.0;
    double epoch_len = 60.0;
    std::vector<double> values;
    std::vector<std::uint8_t> valid;

    EpochSeries() = default;
    EpochSeries(double start_s, double len_s, std::size_t n)
        : start(start_s), epoch_len(len_s), values(n, 0.0), valid(n, 0) {}

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
    double end() const { return start + epoch_len * static_cast<double>(values.size()); }
    double epoch_start(std::size_t i) const { return start + epoch_len * static_cast<double>(i); }
    double epoch_mid(std::size_t i) const { return epoch_start(i) + 0.5 * epoch_len; }
    bool is_valid(std::size_t i) const { return valid[i] != 0; }
    std::size_t valid_count() const;
    TimeRange range() const { return {start, end()}; }

    void set(std::size_t i, double v)
    {
        values[i] = v;
        valid[i] = 1;
    }
    void invalidate(std::size_t i) { valid[i] = 0; }

    void validate() const;
};

enum class NonWearReason { charging, zero_motion, outlier, quality };

std::string_view to_string(NonWearReason reason);

struct MaskInterval {
    double start = 0.0;
    double end = 0.0;
    NonWearReason reason = NonWearReason::zero_motion;
};

/// Sorted, disjoint [start, end) intervals flagged as non-wear.
class WearMask {
public:
    WearMask() = default;

    /// Builds a mask from arbitrary (possibly overlapping) intervals. Overlaps are
    /// resolved by reason priority: charging > quality > outlier > zero_motion.
    static WearMask from_intervals(std::vector<MaskInterval> raw);

    const std::vector<MaskInterval>& intervals() const { return intervals_; }
    bool empty() const { return intervals_.empty(); }

    /// True when [a, b) has a non-empty intersection with any interval.
    bool overlaps(double a, double b) const;
    double total_duration() const;

    WearMask merged_with(const WearMask& other) const;

private:
    std::vector<MaskInterval> intervals_;
};

/// Epochs overlapping any mask interval become invalid.
EpochSeries apply_mask(EpochSeries s, const WearMask& mask);

} // namespace circadian
