#pragma once

#include "circadian/chronotype.hpp"
#include "circadian/ingest.hpp"
#include "circadian/kernels.hpp"
#include "circadian/manifest.hpp"
#include "circadian/rhythm.hpp"
#include "circadian/series.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace circadian::synth {

/// PCG-XSL-RR 128/64 with an explicit stream selector.
class Pcg64 {
public:
    Pcg64(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal (Box-Muller, pairs cached).
    double normal();
    double normal(double mu, double sd) { return mu + sd * normal(); }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    unsigned __int128 state_ = 0;
    unsigned __int128 inc_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Ground-truth cosine of one latent signal in local clock time.
struct SignalTruth {
    double mesor = 0.0;
    double amplitude = 0.0;
    double acrophase_hours = 0.0;
    double noise_sd = 0.0;

    double at(double local_seconds) const;
};

struct SynthProfile {
    std::string id;
    std::optional<ChronotypeGroup> chronotype;
    /// Activity intensity in counts per minute; noise_sd is multiplicative.
    SignalTruth activity{1500.0, 1300.0, 15.74, 0.35};
    SignalTruth hr{72.0, 9.0, 15.81, 4.0};
    /// Mean R-R interval in ms; noise_sd is the beat-to-beat sd.
    SignalTruth rri{840.0, 70.0, 4.06, 40.0};
    /// Rhythm of the beat-to-beat sd (ms).
    SignalTruth hrv{40.0, 10.0, 15.21, 0.0};
    SignalTruth cbt{37.0, 0.35, 16.6, 0.05};
    SignalTruth skin_t{33.5, 0.8, 3.0, 0.15};
    /// Relative noise of the watch counts around the reference counts.
    double watch_noise_sd = 0.05;
    /// Accelerometer sensor noise (g), raw mode only.
    double sensor_noise_g = 0.003;
    /// Fraction of 10-minute blocks dropped, independently per device.
    double missingness = 0.0;
    /// Daily watch charging gap.
    double charging_minutes_per_day = 0.0;
    /// Fraction of temperature minutes with quality score 1 (and corrupted values).
    double low_quality_fraction = 0.05;
    double utc_offset_minutes = 120.0;
    /// When set, MEQ administrations scatter around this score instead of following the linear model.
    std::optional<double> meq_target;
    double age = 30.0;
    int sex = 0;
    std::uint64_t seed = 1;

    void validate() const;
};

enum class ActivityMode { counts, raw };

/// MEQ = a + b * HR acrophase + N(0, sigma); each administration adds N(0, admin_sd) and is rounded.
struct MeqModel {
    double a = 135.0;
    double b = -5.27;
    double sigma = 5.0;
    double admin_sd = 0.0;
    int administrations = 3;
};

struct CohortOptions {
    int days = 14;
    /// UTC midnight of the first collection day; each participant starts at local midnight.
    std::int64_t start_day_unix_s = 1684800000;
    ActivityMode activity_mode = ActivityMode::counts;
    double watch_hz = 25.0;
    double acti_hz = 80.0;
    MeqModel meq;
    bool with_activity = true;
    bool with_hr = true;
    bool with_rri = true;
    bool with_temperature = true;
    int threads = 0;
};

struct ParticipantRecord {
    SynthProfile profile;
    double collection_start = 0.0;
    double collection_end = 0.0;
    std::optional<EpochSeries> acti_counts, watch_counts; // counts mode
    std::optional<AccelTriple> acti_accel, watch_accel;   // raw mode
    std::optional<SampleSeries> hr, rri, cbt, skin_t;
    std::vector<MeqAdministration> meq;

    ParticipantEntry manifest_entry() const;
};

std::vector<ParticipantRecord> generate_cohort(const std::vector<SynthProfile>& profiles, const CohortOptions& opts);

/// Demo cohort: 6 Evening, 16 Intermediate, 14 Morning participants whose HR
/// acrophases have in-sample group medians 17.11 / 16.53 / 15.18 h and IQRs
/// 1.48 / 1.73 / 0.74 h; the other signals follow HR with individual jitter.
std::vector<SynthProfile> demo_profiles(std::uint64_t seed);

/// Cohort for the linear MEQ model: HR acrophases ~ N(15.8, 1.7) clamped to [12, 20].
std::vector<SynthProfile> linear_profiles(std::uint64_t seed, std::size_t n);

/// Rescales x so its type-7 median and IQR equal the targets exactly.
void match_median_iqr(std::vector<double>& x, double median, double iqr);

/// Writes per-participant CSVs, manifest.json and ground_truth.csv under dir.
void write_dataset(const std::filesystem::path& dir, const std::vector<ParticipantRecord>& records, int threads = 0);

/// Brute-force minimum-SSE cosinor over a (mesor, amplitude, acrophase) grid.
CosinorFit oracle_cosinor_grid(const EpochSeries& s, const kernels::CosinorGrid& grid, double utc_offset_s = 0.0,
                               int threads = 0);

} // namespace circadian::synth
