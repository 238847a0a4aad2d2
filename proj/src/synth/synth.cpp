#include "circadian/synth.hpp"
#include "circadian/stats.hpp"

#include "internal/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace circadian::synth {

namespace {

constexpr double kDay = 86400.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSegment = 4.0; // motion burst length, s
constexpr int kBeatsPerBurst = 64;

enum Stream : std::uint64_t {
    s_activity = 1,
    s_watch,
    s_motion,
    s_hr,
    s_rri,
    s_temperature,
    s_missing_watch,
    s_missing_acti,
    s_missing_temp,
    s_charging,
    s_meq,
    s_sensor_watch,
    s_sensor_acti,
    s_cohort = 1000,
};

std::uint64_t splitmix(std::uint64_t& x)
{
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double wrap24(double h)
{
    double r = std::fmod(h, 24.0);
    if (r < 0.0)
        r += 24.0;
    return r;
}

/// Minute-level presence after dropping random 10-minute blocks.
void drop_blocks(std::vector<std::uint8_t>& present, double fraction, Pcg64& rng)
{
    const std::size_t blocks = present.size() / 10;
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(blocks)));
    std::vector<std::size_t> order(blocks);
    for (std::size_t i = 0; i < blocks; ++i)
        order[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(blocks - i));
        std::swap(order[i], order[j]);
        for (std::size_t m = 0; m < 10; ++m)
            present[order[i] * 10 + m] = 0;
    }
}

struct Motion {
    std::vector<double> amp, freq, phase, wx, wy, wz;
};

Motion motion_process(const SynthProfile& p, double start, double offset_s, std::size_t segments)
{
    Pcg64 rng(p.seed, s_motion);
    Motion m;
    const double peak = p.activity.mesor + p.activity.amplitude;
    for (std::size_t j = 0; j < segments; ++j) {
        const double centre = start + offset_s + (static_cast<double>(j) + 0.5) * kSegment;
        const double env = peak > 0.0 ? std::max(0.0, p.activity.at(centre)) / peak : 0.0;
        m.amp.push_back(0.6 * env * std::max(0.0, 1.0 + p.activity.noise_sd * rng.normal()));
        m.freq.push_back(rng.uniform(0.4, 1.4));
        m.phase.push_back(rng.uniform(0.0, kTwoPi));
        m.wx.push_back(rng.uniform(0.2, 1.0));
        m.wy.push_back(rng.uniform(0.2, 1.0));
        m.wz.push_back(rng.uniform(0.2, 1.0));
    }
    return m;
}

AccelTriple sample_motion(const Motion& m, double start, double hz, const std::vector<std::uint8_t>& present,
                          double noise_g, Pcg64& rng)
{
    AccelTriple out;
    out.x.kind = SignalKind::accel_x;
    out.y.kind = SignalKind::accel_y;
    out.z.kind = SignalKind::accel_z;
    for (auto* s : {&out.x, &out.y, &out.z})
        s->nominal_rate_hz = hz;
    const double start_ms = start * 1000.0;
    const double step_ms = 1000.0 / hz;
    const auto total = static_cast<std::size_t>(std::llround(static_cast<double>(present.size()) * 60.0 * hz));
    for (std::size_t i = 0; i < total; ++i) {
        const double rel = static_cast<double>(i) / hz;
        const double nx = rng.normal(), ny = rng.normal(), nz = rng.normal();
        if (!present[static_cast<std::size_t>(rel / 60.0)])
            continue;
        const auto j = std::min(m.amp.size() - 1, static_cast<std::size_t>(rel / kSegment));
        const double tau = rel - static_cast<double>(j) * kSegment;
        const double h = std::sin(std::numbers::pi * tau / kSegment);
        const double motion = m.amp[j] * h * h * std::sin(kTwoPi * m.freq[j] * tau + m.phase[j]);
        const double t = (start_ms + static_cast<double>(i) * step_ms) / 1000.0;
        out.x.t.push_back(t);
        out.y.t.push_back(t);
        out.z.t.push_back(t);
        out.x.values.push_back(m.wx[j] * motion + noise_g * nx);
        out.y.values.push_back(m.wy[j] * motion + noise_g * ny);
        out.z.values.push_back(1.0 + m.wz[j] * motion + noise_g * nz);
    }
    return out;
}

ParticipantRecord generate_one(const SynthProfile& p, const CohortOptions& o)
{
    p.validate();
    ParticipantRecord r;
    r.profile = p;
    const double offset = p.utc_offset_minutes * 60.0;
    const double start = static_cast<double>(o.start_day_unix_s) - offset;
    const auto minutes = static_cast<std::size_t>(o.days) * 1440;
    r.collection_start = start;
    r.collection_end = start + static_cast<double>(minutes) * 60.0;
    const auto minute_t = [&](std::size_t m) { return start + 60.0 * static_cast<double>(m); };
    // Minute summaries describe [t, t + 60); the latent is read at the middle.
    const auto minute_local = [&](std::size_t m) { return minute_t(m) + 30.0 + offset; };

    std::vector<std::uint8_t> watch(minutes, 1), acti(minutes, 1), temp(minutes, 1);
    {
        Pcg64 rw(p.seed, s_missing_watch), ra(p.seed, s_missing_acti), rt(p.seed, s_missing_temp);
        drop_blocks(watch, p.missingness, rw);
        drop_blocks(acti, p.missingness, ra);
        drop_blocks(temp, p.missingness, rt);
        Pcg64 rc(p.seed, s_charging);
        const auto gap = static_cast<std::size_t>(std::llround(p.charging_minutes_per_day));
        for (int d = 0; d < o.days; ++d) {
            const std::size_t first = static_cast<std::size_t>(d) * 1440 + 18 * 60 + rc.below(4 * 60);
            for (std::size_t m = first; m < std::min(minutes, first + gap); ++m)
                watch[m] = 0;
        }
    }

    if (o.with_activity && o.activity_mode == ActivityMode::counts) {
        Pcg64 ra(p.seed, s_activity), rw(p.seed, s_watch);
        EpochSeries a(start, 60.0, minutes), w(start, 60.0, minutes);
        for (std::size_t m = 0; m < minutes; ++m) {
            const double pre =
                std::max(0.0, p.activity.at(minute_local(m)) * (1.0 + p.activity.noise_sd * ra.normal()));
            const double wv = std::max(0.0, pre * (1.0 + p.watch_noise_sd * rw.normal()));
            if (acti[m])
                a.set(m, std::round(pre));
            if (watch[m])
                w.set(m, std::round(wv));
        }
        r.acti_counts = std::move(a);
        r.watch_counts = std::move(w);
    } else if (o.with_activity) {
        const auto segments = static_cast<std::size_t>(std::ceil(static_cast<double>(minutes) * 60.0 / kSegment));
        const Motion motion = motion_process(p, start, offset, segments);
        Pcg64 nw(p.seed, s_sensor_watch), na(p.seed, s_sensor_acti);
        r.watch_accel = sample_motion(motion, start, o.watch_hz, watch, p.sensor_noise_g, nw);
        r.acti_accel = sample_motion(motion, start, o.acti_hz, acti, p.sensor_noise_g, na);
    }

    if (o.with_hr) {
        Pcg64 rng(p.seed, s_hr);
        SampleSeries s;
        s.kind = SignalKind::hr;
        s.nominal_rate_hz = 1.0 / 60.0;
        for (std::size_t m = 0; m < minutes; ++m) {
            const double v = p.hr.at(minute_local(m)) + p.hr.noise_sd * rng.normal();
            if (!watch[m])
                continue;
            s.t.push_back(minute_t(m));
            s.values.push_back(v);
        }
        r.hr = std::move(s);
    }

    if (o.with_rri) {
        Pcg64 rng(p.seed, s_rri);
        SampleSeries s;
        s.kind = SignalKind::rri;
        for (std::size_t w = 0; w < minutes / 10; ++w) {
            const double level = p.rri.noise_sd * rng.normal();
            const double spread = std::max(0.0, 1.0 + p.hrv.noise_sd * rng.normal());
            const bool keep = watch[w * 10] != 0;
            double t = minute_t(w * 10) + 1.0;
            for (int b = 0; b < kBeatsPerBurst; ++b) {
                const double local = t + offset;
                const double sd = std::max(5.0, p.hrv.at(local)) * spread;
                const double rr = std::clamp(p.rri.at(local) + level + sd * rng.normal(), 300.0, 2000.0);
                const double stamp = std::round(t * 1000.0) / 1000.0;
                if (keep) {
                    s.t.push_back(stamp);
                    s.values.push_back(rr);
                }
                t += rr / 1000.0;
            }
        }
        r.rri = std::move(s);
    }

    if (o.with_temperature) {
        Pcg64 rng(p.seed, s_temperature);
        SampleSeries c, k;
        c.kind = SignalKind::cbt;
        k.kind = SignalKind::skin_t;
        c.nominal_rate_hz = k.nominal_rate_hz = 1.0 / 60.0;
        for (std::size_t m = 0; m < minutes; ++m) {
            const bool poor = rng.uniform() < p.low_quality_fraction;
            const int q = poor ? 1 : 2 + static_cast<int>(rng.below(3));
            double cv = p.cbt.at(minute_local(m)) + p.cbt.noise_sd * rng.normal();
            double kv = p.skin_t.at(minute_local(m)) + p.skin_t.noise_sd * rng.normal();
            const double cbad = rng.normal(0.0, 1.5), kbad = rng.normal(0.0, 3.0);
            if (poor) {
                cv += cbad;
                kv += kbad;
            }
            if (!temp[m])
                continue;
            for (auto [series, v] : {std::pair{&c, cv}, std::pair{&k, kv}}) {
                series->t.push_back(minute_t(m));
                series->values.push_back(v);
                series->quality.push_back(q);
            }
        }
        r.cbt = std::move(c);
        r.skin_t = std::move(k);
    }

    Pcg64 rng(p.seed, s_meq);
    const bool target = p.meq_target.has_value();
    const double centre = target ? *p.meq_target : o.meq.a + o.meq.b * p.hr.acrophase_hours + o.meq.sigma * rng.normal();
    for (int k = 0; k < o.meq.administrations; ++k) {
        const double jitter =
            target ? std::clamp(rng.normal(0.0, 1.5), -2.5, 2.5) : o.meq.admin_sd * rng.normal();
        r.meq.push_back({7 * k, std::clamp(std::round(centre + jitter), 16.0, 86.0)});
    }
    return r;
}

template <class Fn>
void write_file(const std::filesystem::path& path, Fn&& body)
{
    fmt::memory_buffer buf;
    body(buf);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string() + " (is the output directory writable?)");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out)
        throw Error("error writing " + path.string());
}

std::int64_t to_ms(double t) { return std::llround(t * 1000.0); }

void write_accel(const std::filesystem::path& path, const AccelTriple& a)
{
    write_file(path, [&](fmt::memory_buffer& b) {
        fmt::format_to(std::back_inserter(b), "t_unix_ms,x_g,y_g,z_g\n");
        for (std::size_t i = 0; i < a.x.size(); ++i)
            fmt::format_to(std::back_inserter(b), "{},{:.5f},{:.5f},{:.5f}\n", std::round(a.x.t[i] * 1e4) / 10.0,
                           a.x.values[i], a.y.values[i], a.z.values[i]);
    });
}

} // namespace

Pcg64::Pcg64(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t x = seed;
    const unsigned __int128 s = (static_cast<unsigned __int128>(splitmix(x)) << 64) | splitmix(x);
    std::uint64_t y = stream ^ 0x5851f42d4c957f2dULL;
    inc_ = ((static_cast<unsigned __int128>(splitmix(y)) << 64) | splitmix(y)) | 1U;
    next();
    state_ += s;
    next();
}

std::uint64_t Pcg64::next()
{
    constexpr unsigned __int128 mult =
        (static_cast<unsigned __int128>(2549297995355413924ULL) << 64) | 4865540595714422341ULL;
    state_ = state_ * mult + inc_;
    const auto hi = static_cast<std::uint64_t>(state_ >> 64);
    const auto lo = static_cast<std::uint64_t>(state_);
    const auto rot = static_cast<unsigned>(state_ >> 122);
    const std::uint64_t xored = hi ^ lo;
    return (xored >> rot) | (xored << ((64U - rot) & 63U));
}

double Pcg64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Pcg64::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
}

std::uint64_t Pcg64::below(std::uint64_t n)
{
    if (n == 0)
        throw Error("Pcg64::below: empty range");
    const std::uint64_t limit = -n % n; // rejection threshold for an unbiased draw
    while (true) {
        const std::uint64_t v = next();
        if (v >= limit)
            return v % n;
    }
}

double SignalTruth::at(double local_seconds) const
{
    return mesor + amplitude * std::cos(kTwoPi * (local_seconds / kDay - acrophase_hours / 24.0));
}

void SynthProfile::validate() const
{
    const auto fail = [&](const std::string& what) { throw Error("synth profile '" + id + "': " + what); };
    if (id.empty())
        throw Error("synth profile: empty id");
    if (!(missingness >= 0.0 && missingness < 1.0))
        fail("missingness must be in [0, 1)");
    if (!(low_quality_fraction >= 0.0 && low_quality_fraction < 1.0))
        fail("low_quality_fraction must be in [0, 1)");
    if (!(charging_minutes_per_day >= 0.0 && charging_minutes_per_day <= 240.0))
        fail("charging_minutes_per_day must be in [0, 240]");
    if (!(watch_noise_sd >= 0.0) || !(sensor_noise_g >= 0.0))
        fail("noise levels must be non-negative");
    for (const auto* s : {&activity, &hr, &rri, &hrv, &cbt, &skin_t})
        if (!(s->amplitude >= 0.0 && s->noise_sd >= 0.0 && s->acrophase_hours >= 0.0 && s->acrophase_hours < 24.0))
            fail("signal truths need amplitude >= 0, noise_sd >= 0 and acrophase in [0, 24)");
    if (meq_target && !(*meq_target >= 16.0 && *meq_target <= 86.0))
        fail("meq_target must be in [16, 86]");
}

ParticipantEntry ParticipantRecord::manifest_entry() const
{
    ParticipantEntry e;
    e.id = profile.id;
    e.utc_offset_minutes = profile.utc_offset_minutes;
    e.collection_start_ms = to_ms(collection_start);
    e.collection_end_ms = to_ms(collection_end);
    const std::string dir = profile.id + "/";
    if (acti_counts)
        e.signals[signal_key::acti_counts] = dir + "acti_counts.csv";
    if (watch_counts)
        e.signals[signal_key::watch_counts] = dir + "watch_counts.csv";
    if (acti_accel)
        e.signals[signal_key::acti_accel] = dir + "acti_accel.csv";
    if (watch_accel)
        e.signals[signal_key::watch_accel] = dir + "watch_accel.csv";
    if (hr)
        e.signals[signal_key::hr] = dir + "hr.csv";
    if (rri)
        e.signals[signal_key::rri] = dir + "rri.csv";
    if (cbt)
        e.signals[signal_key::temperature] = dir + "temperature.csv";
    e.meq = meq;
    e.age = profile.age;
    e.sex = profile.sex;
    return e;
}

std::vector<ParticipantRecord> generate_cohort(const std::vector<SynthProfile>& profiles, const CohortOptions& opts)
{
    if (opts.days < 2)
        throw Error("synth: days must be at least 2 (cosinor fitting needs one full period and the non-parametric "
                    "metrics need two full days)");
    if (!(opts.watch_hz > 0.0 && opts.acti_hz > 0.0))
        throw Error("synth: sampling rates must be positive");
    if (opts.meq.administrations < 1)
        throw Error("synth: need at least one MEQ administration");
    std::vector<ParticipantRecord> out(profiles.size());
    detail::parallel_for(profiles.size(), opts.threads,
                         [&](std::size_t i) { out[i] = generate_one(profiles[i], opts); });
    return out;
}

void match_median_iqr(std::vector<double>& x, double median, double iqr)
{
    if (x.size() < 2)
        throw Error("match_median_iqr: need at least two values");
    const double m = stats::median(x);
    const double q = stats::quantile(x, 0.75) - stats::quantile(x, 0.25);
    const double scale = q > 0.0 ? iqr / q : 1.0;
    for (double& v : x)
        v = median + (v - m) * scale;
}

std::vector<SynthProfile> demo_profiles(std::uint64_t seed)
{
    struct GroupSpec {
        ChronotypeGroup group;
        std::size_t n;
        double acro_median, acro_iqr;
        double meq_mean, meq_sd, meq_lo, meq_hi;
    };
    const GroupSpec specs[] = {
        {ChronotypeGroup::evening, 6, 17.11, 1.48, 36.83, 3.83, 28.0, 38.5},
        {ChronotypeGroup::intermediate, 16, 16.53, 1.73, 49.65, 4.79, 45.5, 54.5},
        {ChronotypeGroup::morning, 14, 15.18, 0.74, 63.40, 4.45, 61.5, 80.0},
    };
    Pcg64 rng(seed, s_cohort);
    std::vector<SynthProfile> out;
    for (const auto& g : specs) {
        std::vector<double> acro(g.n);
        for (double& a : acro)
            a = rng.normal(g.acro_median, g.acro_iqr / 1.349);
        match_median_iqr(acro, g.acro_median, g.acro_iqr);
        for (double a : acro) {
            SynthProfile p;
            p.id = fmt::format("P{:02d}", out.size() + 1);
            p.chronotype = g.group;
            p.hr.acrophase_hours = wrap24(a);
            p.activity.acrophase_hours = wrap24(a - 0.07 + rng.normal(0.0, 0.35));
            p.cbt.acrophase_hours = wrap24(a + 0.8 + rng.normal(0.0, 0.6));
            p.skin_t.acrophase_hours = wrap24(3.0 + rng.normal(0.0, 1.2));
            p.rri.acrophase_hours = wrap24(a + 12.0 + rng.normal(0.0, 0.3));
            p.hrv.acrophase_hours = wrap24(a - 0.6 + rng.normal(0.0, 0.8));
            p.hrv.noise_sd = 0.1;
            p.rri.noise_sd = 15.0;
            p.missingness = 0.02;
            p.charging_minutes_per_day = 30.0;
            p.meq_target = std::clamp(rng.normal(g.meq_mean, g.meq_sd), g.meq_lo, g.meq_hi);
            p.age = std::round(std::clamp(rng.normal(32.0, 8.0), 18.0, 65.0));
            p.sex = static_cast<int>(rng.below(2));
            p.seed = rng.next();
            out.push_back(std::move(p));
        }
    }
    return out;
}

std::vector<SynthProfile> linear_profiles(std::uint64_t seed, std::size_t n)
{
    Pcg64 rng(seed, s_cohort + 1);
    std::vector<SynthProfile> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::clamp(rng.normal(15.8, 1.7), 12.0, 20.0);
        SynthProfile p;
        p.id = fmt::format("P{:02d}", i + 1);
        p.hr.acrophase_hours = a;
        p.activity.acrophase_hours = wrap24(a - 0.07 + rng.normal(0.0, 0.35));
        p.cbt.acrophase_hours = wrap24(a + 0.8 + rng.normal(0.0, 0.6));
        p.skin_t.acrophase_hours = wrap24(3.0 + rng.normal(0.0, 1.2));
        p.rri.acrophase_hours = wrap24(a + 12.0 + rng.normal(0.0, 0.3));
        p.hrv.acrophase_hours = wrap24(a - 0.6 + rng.normal(0.0, 0.8));
        p.hrv.noise_sd = 0.1;
        p.rri.noise_sd = 15.0;
        p.age = std::round(std::clamp(rng.normal(32.0, 8.0), 18.0, 65.0));
        p.sex = static_cast<int>(rng.below(2));
        p.seed = rng.next();
        out.push_back(std::move(p));
    }
    return out;
}

void write_dataset(const std::filesystem::path& dir, const std::vector<ParticipantRecord>& records, int threads)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw Error("cannot create output directory " + dir.string() + ": " + ec.message());

    detail::parallel_for(records.size(), threads, [&](std::size_t i) {
        const auto& r = records[i];
        const auto pdir = dir / r.profile.id;
        std::filesystem::create_directories(pdir);
        if (r.acti_counts)
            write_counts(pdir / "acti_counts.csv", *r.acti_counts);
        if (r.watch_counts)
            write_counts(pdir / "watch_counts.csv", *r.watch_counts);
        if (r.acti_accel)
            write_accel(pdir / "acti_accel.csv", *r.acti_accel);
        if (r.watch_accel)
            write_accel(pdir / "watch_accel.csv", *r.watch_accel);
        if (r.hr)
            write_file(pdir / "hr.csv", [&](fmt::memory_buffer& b) {
                fmt::format_to(std::back_inserter(b), "t_unix_ms,bpm\n");
                for (std::size_t k = 0; k < r.hr->size(); ++k)
                    fmt::format_to(std::back_inserter(b), "{},{:.2f}\n", to_ms(r.hr->t[k]), r.hr->values[k]);
            });
        if (r.rri)
            write_file(pdir / "rri.csv", [&](fmt::memory_buffer& b) {
                fmt::format_to(std::back_inserter(b), "t_unix_ms,rri_ms\n");
                for (std::size_t k = 0; k < r.rri->size(); ++k)
                    fmt::format_to(std::back_inserter(b), "{},{:.1f}\n", to_ms(r.rri->t[k]), r.rri->values[k]);
            });
        if (r.cbt && r.skin_t)
            write_file(pdir / "temperature.csv", [&](fmt::memory_buffer& b) {
                fmt::format_to(std::back_inserter(b), "t_unix_ms,cbt_c,skin_c,quality\n");
                for (std::size_t k = 0; k < r.cbt->size(); ++k)
                    fmt::format_to(std::back_inserter(b), "{},{:.3f},{:.3f},{}\n", to_ms(r.cbt->t[k]),
                                   r.cbt->values[k], r.skin_t->values[k], r.cbt->quality[k]);
            });
    });

    Manifest m;
    for (const auto& r : records)
        m.participants.push_back(r.manifest_entry());
    write_manifest(dir / "manifest.json", m);

    write_file(dir / "ground_truth.csv", [&](fmt::memory_buffer& b) {
        fmt::format_to(std::back_inserter(b), "participant,group,signal,mesor,amplitude,acrophase_hours,noise_sd\n");
        for (const auto& r : records) {
            const auto& p = r.profile;
            const std::string group = p.chronotype ? to_string(*p.chronotype) : "";
            const std::pair<const char*, const SignalTruth*> rows[] = {
                {"activity", &p.activity}, {"hr", &p.hr},   {"rri", &p.rri},
                {"hrv_sd", &p.hrv},        {"cbt", &p.cbt}, {"skin_t", &p.skin_t},
            };
            for (const auto& [name, s] : rows)
                fmt::format_to(std::back_inserter(b), "{},{},{},{},{},{},{}\n", p.id, group, name, s->mesor,
                               s->amplitude, s->acrophase_hours, s->noise_sd);
        }
    });
}

CosinorFit oracle_cosinor_grid(const EpochSeries& s, const kernels::CosinorGrid& grid, double utc_offset_s,
                               int threads)
{
    std::vector<double> angle, y;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.is_valid(i)) {
            angle.push_back(local_angle(s.epoch_mid(i), utc_offset_s, 24.0));
            y.push_back(s.values[i]);
        }
    if (y.empty())
        throw Error("oracle_cosinor_grid: no valid epochs");
    const auto best = kernels::cosinor_grid_parallel(angle, y, grid, threads);

    CosinorFit fit;
    fit.n_points = y.size();
    fit.mesor = best.mesor;
    fit.amplitude = best.amplitude;
    fit.acrophase_hours = best.acrophase_hours;
    fit.acrophase_defined = best.amplitude > 0.0;
    double phi = -kTwoPi * best.acrophase_hours / 24.0;
    if (phi <= -std::numbers::pi)
        phi += kTwoPi;
    fit.phi_radians = phi;
    fit.sse = cosinor_sse(s, best.mesor, best.amplitude, best.acrophase_hours, 24.0, utc_offset_s);
    const double mu = stats::mean(y);
    double sst = 0.0;
    for (double v : y)
        sst += (v - mu) * (v - mu);
    fit.r_squared = sst > 0.0 ? std::clamp(1.0 - fit.sse / sst, 0.0, 1.0) : 0.0;
    return fit;
}

} // namespace circadian::synth
