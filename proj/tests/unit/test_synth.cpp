#include "circadian/synth.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace circadian;
using namespace circadian::synth;

namespace {

SynthProfile quiet_profile(const std::string& id, std::uint64_t seed)
{
    SynthProfile p;
    p.id = id;
    p.seed = seed;
    p.activity.noise_sd = 0;
    p.hr.noise_sd = 0;
    p.cbt.noise_sd = 0;
    p.skin_t.noise_sd = 0;
    p.watch_noise_sd = 0;
    p.low_quality_fraction = 0;
    return p;
}

} // namespace

TEST_CASE("pcg64 streams are reproducible and distinct")
{
    Pcg64 a(42, 1), b(42, 1), c(42, 2), d(43, 1);
    bool differs_stream = false, differs_seed = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        CHECK(x == b.next());
        differs_stream |= x != c.next();
        differs_seed |= x != d.next();
    }
    CHECK(differs_stream);
    CHECK(differs_seed);

    Pcg64 r(7, 0);
    double s = 0, ss = 0, mn = 1, mx = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        mn = std::min(mn, u);
        mx = std::max(mx, u);
        const double z = r.normal();
        s += z;
        ss += z * z;
    }
    CHECK(mn >= 0.0);
    CHECK(mx < 1.0);
    CHECK(std::abs(s / n) < 0.01);
    CHECK(std::abs(ss / n - 1) < 0.02);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i)
        seen.insert(r.below(5));
    CHECK(seen == std::set<std::uint64_t>{0, 1, 2, 3, 4});
}

TEST_CASE("median/IQR matching")
{
    std::vector<double> x{3, 9, 1, 4, 7, 2, 8};
    match_median_iqr(x, 16.53, 1.73);
    const auto q = [&](double p) {
        auto v = x;
        std::sort(v.begin(), v.end());
        const double h = (v.size() - 1) * p;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        return v[lo] + (h - lo) * (v[std::min(lo + 1, v.size() - 1)] - v[lo]);
    };
    CHECK(q(0.5) == doctest::Approx(16.53).epsilon(1e-12));
    CHECK(q(0.75) - q(0.25) == doctest::Approx(1.73).epsilon(1e-12));
}

TEST_CASE("noiseless round trip through the generator")
{
    auto p = quiet_profile("q1", 5);
    p.hr.acrophase_hours = 17.11;
    p.activity.acrophase_hours = 15.74;
    CohortOptions o;
    o.days = 4;
    o.with_rri = false;
    o.with_temperature = false;
    const auto rec = generate_cohort({p}, o);
    REQUIRE(rec.size() == 1);
    REQUIRE(rec[0].hr);
    const double off = p.utc_offset_minutes * 60;
    const TimeRange range{rec[0].collection_start, rec[0].collection_end};
    CHECK(range.length() == doctest::Approx(4 * 86400.0));
    const auto hr = epoch_aggregate(*rec[0].hr, 600, Aggregation::mean, range);
    CHECK(std::abs(fit_cosinor(hr, 24, off).acrophase_hours - 17.11) < 1e-3);
    REQUIRE(rec[0].acti_counts);
    const auto ac = epoch_aggregate(*rec[0].acti_counts, 600, Aggregation::mean, range);
    CHECK(std::abs(fit_cosinor(ac, 24, off).acrophase_hours - 15.74) < 1e-3);
    // Identical watch and reference counts without watch noise.
    CHECK(rec[0].watch_counts->values == rec[0].acti_counts->values);
}

TEST_CASE("injected missingness is recovered by the miss-rate count")
{
    SynthProfile p;
    p.id = "m";
    p.missingness = 0.10;
    CohortOptions o;
    o.with_rri = false;
    o.with_temperature = false;
    const auto rec = generate_cohort({p}, o);
    const double rate = miss_rate(*rec[0].acti_counts, rec[0].collection_start, rec[0].collection_end);
    CHECK(std::abs(rate - 0.10) <= 0.01);
}

TEST_CASE("generated R-R intervals keep the configured mean")
{
    SynthProfile p;
    p.id = "r";
    p.seed = 3;
    CohortOptions o;
    o.days = 3;
    o.with_activity = false;
    o.with_hr = false;
    o.with_temperature = false;
    const auto rec = generate_cohort({p}, o);
    REQUIRE(rec[0].rri);
    double s = 0;
    for (double v : rec[0].rri->values)
        s += v;
    CHECK(std::abs(s / rec[0].rri->values.size() - p.rri.mesor) / p.rri.mesor < 0.01);
}

TEST_CASE("cohort preconditions and the demo cohort shape")
{
    SynthProfile p;
    p.id = "x";
    CohortOptions o;
    o.days = 1;
    CHECK_THROWS_AS(generate_cohort({p}, o), Error);
    o.days = 2;
    p.missingness = 1.5;
    CHECK_THROWS_AS(generate_cohort({p}, o), Error);

    const auto demo = demo_profiles(1);
    CHECK(demo.size() == 36);
    int e = 0, i = 0, m = 0;
    for (const auto& d : demo) {
        REQUIRE(d.chronotype);
        e += *d.chronotype == ChronotypeGroup::evening;
        i += *d.chronotype == ChronotypeGroup::intermediate;
        m += *d.chronotype == ChronotypeGroup::morning;
        REQUIRE(d.meq_target);
        CHECK(classify_chronotype(*d.meq_target) == *d.chronotype);
    }
    CHECK(e == 6);
    CHECK(i == 16);
    CHECK(m == 14);
    CHECK(linear_profiles(2, 20).size() == 20);
}

TEST_CASE("written datasets are byte-identical for a repeated seed")
{
    testing::TempDir a("synth"), b("synth");
    CohortOptions o;
    o.days = 2;
    const auto profiles = linear_profiles(9, 3);
    write_dataset(a.path(), generate_cohort(profiles, o));
    write_dataset(b.path(), generate_cohort(profiles, o));
    std::size_t files = 0;
    for (const auto& f : std::filesystem::recursive_directory_iterator(a.path())) {
        if (!f.is_regular_file())
            continue;
        ++files;
        const auto rel = std::filesystem::relative(f.path(), a.path());
        CHECK(testing::read_file(f.path()) == testing::read_file(b.path() / rel));
    }
    CHECK(files >= 3 * 4 + 2);

    // The manifest round-trips through the loader.
    const auto m = load_manifest(a.path() / "manifest.json");
    REQUIRE(m.participants.size() == 3);
    CHECK(m.participants[0].meq.size() == 3);
    const auto hr_path = m.signal_path(m.participants[0], signal_key::hr);
    REQUIRE(hr_path);
    CHECK(std::filesystem::exists(*hr_path));
    CHECK(load_signal(*hr_path, SignalKind::hr).series.size() > 2000);
}

TEST_CASE("raw mode emits both sampling rates")
{
    SynthProfile p;
    p.id = "raw";
    CohortOptions o;
    o.days = 2;
    o.activity_mode = ActivityMode::raw;
    o.with_hr = false;
    o.with_rri = false;
    o.with_temperature = false;
    // Keep the test light: two days of raw data at both rates.
    const auto rec = generate_cohort({p}, o);
    REQUIRE(rec[0].watch_accel);
    REQUIRE(rec[0].acti_accel);
    CHECK(*rec[0].watch_accel->x.nominal_rate_hz == doctest::Approx(25.0));
    CHECK(*rec[0].acti_accel->x.nominal_rate_hz == doctest::Approx(80.0));
    CHECK(rec[0].acti_accel->x.size() == doctest::Approx(80.0 / 25.0 * rec[0].watch_accel->x.size()).epsilon(0.01));
}
