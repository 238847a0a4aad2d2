#include "circadian/chronotype.hpp"
#include "circadian/counts.hpp"
#include "circadian/hrv.hpp"
#include "circadian/ingest.hpp"
#include "circadian/pipeline.hpp"
#include "circadian/rhythm.hpp"
#include "circadian/stats.hpp"
#include "circadian/synth.hpp"
#include "oracles.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

using namespace circadian;
namespace fs = std::filesystem;

namespace {

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    double limit_s; // 0 when untimed
    std::function<std::vector<Check>()> run;
};

EpochSeries cosine(double mesor, double amp, double acro_h, std::size_t n, double noise_sd, std::uint64_t seed)
{
    oracle::XorShift rng(seed);
    EpochSeries s(0.0, 600.0, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = mesor + amp * std::cos(2 * std::numbers::pi * (s.epoch_mid(i) / 86400.0 - acro_h / 24.0));
        s.set(i, v + noise_sd * rng.normal());
    }
    return s;
}

EpochSeries hourly(const std::vector<double>& v)
{
    EpochSeries s(0.0, 3600.0, v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        s.set(i, v[i]);
    return s;
}

double circular_gap_h(double a, double b)
{
    const double d = std::fmod(std::abs(a - b), 24.0);
    return std::min(d, 24.0 - d);
}

fs::path scratch(const std::string& tag)
{
    const auto dir = fs::temp_directory_path() / fmt::format("acceptance_{}_{}", tag, getpid());
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Acrophase of a cosinor epoch series the way the metrics command sees it.
double acrophase(const SampleSeries& s, double start, double end, double utc_offset_s)
{
    const auto e = epoch_aggregate(s, 600.0, Aggregation::mean, TimeRange{start, end});
    return fit_cosinor(minmax_normalize(e), 24.0, utc_offset_s).acrophase_hours;
}

// 1 -------------------------------------------------------------------------

std::vector<Check> cosinor_round_trip()
{
    std::vector<Check> out;
    const std::size_t n = 14 * 144;
    const auto clean = fit_cosinor(cosine(0.5, 0.3, 15.74, n, 0.0, 1));
    const double err = std::abs(clean.acrophase_hours - 15.74);
    out.push_back({"noiseless acrophase", err <= 1e-3, fmt::format("|{:.6f} - 15.74| = {:.2e} h", clean.acrophase_hours, err)});

    // The same target through the synthetic generator (activity counts, local clock).
    synth::SynthProfile p;
    p.id = "c1";
    p.activity.noise_sd = 0;
    p.watch_noise_sd = 0;
    synth::CohortOptions o;
    o.with_hr = o.with_rri = o.with_temperature = false;
    const auto rec = synth::generate_cohort({p}, o);
    const auto ac = epoch_aggregate(*rec[0].acti_counts, 600.0, Aggregation::mean,
                                    TimeRange{rec[0].collection_start, rec[0].collection_end});
    const double gen = fit_cosinor(minmax_normalize(ac), 24.0, p.utc_offset_minutes * 60).acrophase_hours;
    out.push_back({"generator acrophase", std::abs(gen - 15.74) <= 1e-3, fmt::format("{:.6f} h", gen)});

    kernels::CosinorGrid grid;
    grid.acro_step_h = 0.01;
    const auto noisy = cosine(0.5, 0.3, 15.74, n, 0.05, 7);
    const auto fit = fit_cosinor(noisy);
    const auto orc = synth::oracle_cosinor_grid(noisy, grid);
    const double dm = std::abs(fit.mesor - orc.mesor), da = std::abs(fit.amplitude - orc.amplitude);
    const double dp = circular_gap_h(fit.acrophase_hours, orc.acrophase_hours);
    out.push_back({"noisy fit within one grid cell",
                   dm <= grid.mesor_step + 1e-12 && da <= grid.amp_step + 1e-12 && dp <= grid.acro_step_h + 1e-9,
                   fmt::format("dM={:.4f} dA={:.4f} dphi={:.4f} h (cell {} / {} / {} h), SSE fit {:.6f} oracle {:.6f}",
                               dm, da, dp, grid.mesor_step, grid.amp_step, grid.acro_step_h, fit.sse, orc.sse)});
    return out;
}

// 2 -------------------------------------------------------------------------

std::vector<Check> cross_rate_counts()
{
    synth::SynthProfile p;
    p.id = "raw";
    synth::CohortOptions o;
    o.days = 2;
    o.activity_mode = synth::ActivityMode::raw;
    o.with_hr = o.with_rri = o.with_temperature = false;
    const auto rec = synth::generate_cohort({p}, o);
    const auto w = counts_from_accel(*rec[0].watch_accel).vm;
    const auto a = counts_from_accel(*rec[0].acti_accel).vm;
    const TimeRange day{rec[0].collection_start, rec[0].collection_start + 86400.0};
    const auto wd = restrict_to(w, day), ad = restrict_to(a, day);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < std::min(wd.size(), ad.size()); ++i)
        if (wd.is_valid(i) && ad.is_valid(i)) {
            x.push_back(wd.values[i]);
            y.push_back(ad.values[i]);
        }
    const double r = x.size() > 2 ? oracle::pearson_r(x, y) : 0.0;
    return {{"25 Hz vs 80 Hz minute counts", x.size() >= 1400 && r >= 0.98,
             fmt::format("r = {:.4f} over {} minutes", r, x.size())}};
}

// 3 -------------------------------------------------------------------------

bool rel_close(double a, double b, double tol)
{
    return std::abs(a - b) <= tol * std::max(std::abs(b), 1.0);
}

std::vector<Check> hrv_correctness()
{
    std::vector<Check> out;
    const auto a = hrv_stats(std::vector<double>(100, 800.0));
    out.push_back({"constant 800 ms", a.mean_rr == 800 && a.sdnn == 0 && a.rmssd == 0 && a.pnn50 == 0,
                   fmt::format("mean {} sdnn {} rmssd {} pnn50 {}", a.mean_rr, a.sdnn, a.rmssd, a.pnn50)});

    std::vector<double> alt;
    for (int i = 0; i < 10; ++i)
        alt.push_back(i % 2 ? 900.0 : 800.0);
    const auto b = hrv_stats(alt);
    out.push_back({"alternating 800/900 ms", rel_close(b.rmssd, 100, 1e-9) && b.pnn50 == 1.0,
                   fmt::format("rmssd {} pnn50 {}", b.rmssd, b.pnn50)});

    const auto c = hrv_stats(std::vector<double>{800, 840, 845});
    const double m = 2485.0 / 3.0;
    const double sd = std::sqrt(((800 - m) * (800 - m) + (840 - m) * (840 - m) + (845 - m) * (845 - m)) / 2.0);
    const double rmssd = std::sqrt((40.0 * 40.0 + 5.0 * 5.0) / 2.0);
    // Successive differences 40 and 5 ms: none exceeds 50 ms.
    out.push_back({"[800, 840, 845] ms",
                   rel_close(c.mean_rr, m, 1e-9) && rel_close(c.sdnn, sd, 1e-9) && rel_close(c.rmssd, rmssd, 1e-9) &&
                       c.pnn50 == 0.0,
                   fmt::format("mean {:.6f} sdnn {:.6f} rmssd {:.6f} pnn50 {} (hand: {:.6f} {:.6f} {:.6f} 0; "
                               "a listed pNN50 of 0.5 contradicts the 50 ms rule)",
                               c.mean_rr, c.sdnn, c.rmssd, c.pnn50, m, sd, rmssd)});

    oracle::XorShift rng(2024);
    std::size_t ok = 0;
    for (int w = 0; w < 100; ++w) {
        const std::size_t n = 30 + rng.next() % 90;
        std::vector<double> rr(n);
        for (auto& v : rr)
            v = 850 + 60 * rng.normal();
        const double shift = -200 + 400 * rng.uniform(), k = 0.5 + 1.5 * rng.uniform();
        auto shifted = rr, scaled = rr;
        for (auto& v : shifted)
            v += shift;
        for (auto& v : scaled)
            v *= k;
        const auto base = hrv_stats(rr), s = hrv_stats(shifted);
        const auto g = hrv_stats(scaled, 50.0 * k);
        ok += rel_close(s.mean_rr, base.mean_rr + shift, 1e-9) && rel_close(s.sdnn, base.sdnn, 1e-9) &&
              rel_close(s.rmssd, base.rmssd, 1e-9) && s.pnn50 == base.pnn50 &&
              rel_close(g.mean_rr, k * base.mean_rr, 1e-9) && rel_close(g.sdnn, k * base.sdnn, 1e-9) &&
              rel_close(g.rmssd, k * base.rmssd, 1e-9) && g.pnn50 == base.pnn50;
    }
    out.push_back({"translation/scaling invariants", ok == 100, fmt::format("{}/100 windows", ok)});
    return out;
}

// 4 -------------------------------------------------------------------------

std::vector<Check> nonparametric()
{
    std::vector<Check> out;
    std::vector<double> sq;
    for (int d = 0; d < 14; ++d)
        for (int h = 0; h < 24; ++h)
            sq.push_back(h >= 8 && h < 18 ? 1.0 : 0.0);
    NonparametricOptions o;
    o.m10l5 = ProfileResolution::hourly;
    const auto m = nonparametric_metrics(hourly(sq), o);
    out.push_back({"square wave", m.is && *m.is == 1.0 && m.l5 == 0.0 && m.ra && *m.ra == 1.0,
                   fmt::format("IS {} L5 {} RA {}", m.is.value_or(NAN), m.l5, m.ra.value_or(NAN))});

    for (std::size_t n : {48u, 336u}) {
        std::vector<double> v;
        for (std::size_t i = 0; i < n; ++i)
            v.push_back(static_cast<double>(i % 2));
        const double iv = nonparametric_metrics(hourly(v)).iv.value_or(NAN);
        const double closed = 4.0 * n / (n - 1.0);
        out.push_back({fmt::format("alternating IV, N={}", n), std::abs(iv - closed) <= 1e-6,
                       fmt::format("IV {:.9f} vs 4N/(N-1) = {:.9f}; the non-wrapping definition gives exactly 4, "
                                   "the closed form needs a wrap-around pair",
                                   iv, closed)});
    }

    // Null level of IS for shuffled noise, estimated independently by Monte Carlo.
    const std::size_t n = 336;
    oracle::XorShift mc(77);
    double null = 0;
    const int draws = 2000;
    for (int k = 0; k < draws; ++k) {
        std::vector<double> v(n);
        for (auto& x : v)
            x = mc.normal();
        null += oracle::interdaily_stability(v);
    }
    null /= draws;
    std::size_t inside = 0, exact = 0;
    double acc = 0;
    for (int seed = 0; seed < 100; ++seed) {
        oracle::XorShift r(1000 + seed);
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = 0.5 + 0.3 * std::cos(2 * std::numbers::pi * static_cast<double>(i % 24) / 24.0) + 0.1 * r.normal();
        for (std::size_t i = n; i > 1; --i)
            std::swap(v[i - 1], v[r.next() % i]);
        const double is = nonparametric_metrics(hourly(v)).is.value_or(NAN);
        acc += is;
        inside += std::abs(is - null) <= 0.05;
        exact += std::abs(is - oracle::interdaily_stability(v)) <= 1e-12;
    }
    out.push_back({"shuffled IS vs Monte-Carlo null", std::abs(acc / 100 - null) <= 0.05 && exact == 100,
                   fmt::format("mean IS {:.4f} vs null {:.4f}; {}/100 shuffles equal the IS oracle, "
                               "{}/100 individually within 0.05 of the null",
                               acc / 100, null, exact, inside)});
    return out;
}

// 5 -------------------------------------------------------------------------

std::vector<Check> statistical_tests()
{
    std::vector<Check> out;
    oracle::XorShift rng(55);
    double worst_sr = 0;
    for (int k = 0; k < 20; ++k) {
        std::vector<double> x(10), y(10);
        for (std::size_t i = 0; i < 10; ++i) {
            x[i] = rng.normal();
            y[i] = x[i] + 0.4 * rng.normal() + 0.3;
        }
        const auto r = stats::wilcoxon_signed_rank(x, y);
        worst_sr = std::max(worst_sr, std::abs(r.p_value - oracle::signed_rank_enumeration_p(x, y)));
    }
    out.push_back({"signed-rank exact p vs 2^10 enumeration", worst_sr <= 1e-12,
                   fmt::format("max |dp| = {:.2e} over 20 samples", worst_sr)});

    double worst_rs = 0;
    for (int k = 0; k < 20; ++k) {
        std::vector<double> a(6), b(6);
        for (auto& v : a)
            v = rng.normal();
        for (auto& v : b)
            v = rng.normal() + 0.8;
        const auto r = stats::wilcoxon_rank_sum(a, b);
        worst_rs = std::max(worst_rs, std::abs(r.p_value - oracle::mann_whitney_exact_p(a, b)));
    }
    out.push_back({"rank-sum p vs exact enumeration (6, 6)", worst_rs <= 0.02,
                   fmt::format("max |dp| = {:.4f} over 20 samples", worst_rs)});

    // Ranks 1..15 split 1,2,3,8,10 | 4,6,7,9,13 | 5,11,12,14,15 -> sums 24, 39, 57.
    const std::vector<std::vector<double>> groups{{1, 2, 3, 8, 10}, {4, 6, 7, 9, 13}, {5, 11, 12, 14, 15}};
    const double h_hand = 12.0 / (15.0 * 16.0) * (24.0 * 24 / 5 + 39.0 * 39 / 5 + 57.0 * 57 / 5) - 3.0 * 16;
    const auto kw = stats::kruskal_wallis(groups);
    out.push_back({"Kruskal-Wallis H vs hand table", std::abs(kw.statistic - h_hand) <= 1e-9,
                   fmt::format("H {:.12f} hand {:.12f}", kw.statistic, h_hand)});

    std::vector<double> g1, g2;
    for (int i = 0; i < 9; ++i)
        g1.push_back(1.3 * i + 0.1 * (i % 3));
    for (int i = 0; i < 11; ++i)
        g2.push_back(1.1 * i + 3.05);
    const auto h2 = stats::kruskal_wallis(std::vector<std::vector<double>>{g1, g2});
    stats::RankSumOptions plain;
    plain.continuity = false;
    const double z = stats::wilcoxon_rank_sum(g1, g2, plain).statistic;
    out.push_back({"H = z^2 on tie-free groups", std::abs(h2.statistic - z * z) <= 1e-6,
                   fmt::format("H {:.9f} z^2 {:.9f}", h2.statistic, z * z)});

    std::vector<stats::RmObservation> rm;
    for (int s = 0; s < 5; ++s)
        for (int k = 0; k < 6; ++k)
            rm.push_back({fmt::format("S{}", s), 1.0 * k, 10.0 * s + 2.0 * k});
    const double rmr = stats::rm_corr(rm).statistic;
    out.push_back({"rm_corr on perfect within-subject data", std::abs(rmr - 1.0) <= 1e-12, fmt::format("r {}", rmr)});
    return out;
}

// 6 -------------------------------------------------------------------------

FeatureMatrix matrix(const std::vector<std::string>& names, const std::vector<std::vector<double>>& cols)
{
    FeatureMatrix m;
    m.names = names;
    m.values.resize(static_cast<Eigen::Index>(cols[0].size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < cols[j].size(); ++i)
            m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cols[j][i];
    return m;
}

std::vector<Check> regression()
{
    std::vector<Check> out;
    std::size_t covered = 0;
    double slope_sum = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        synth::CohortOptions o;
        o.with_activity = o.with_rri = o.with_temperature = false;
        const auto rec = synth::generate_cohort(synth::linear_profiles(seed, 36), o);
        std::vector<double> acro, meq;
        for (const auto& r : rec) {
            acro.push_back(acrophase(*r.hr, r.collection_start, r.collection_end, r.profile.utc_offset_minutes * 60));
            meq.push_back(MeqScore::from_administrations(r.profile.id, r.meq).score);
        }
        const auto model = fit_ols(meq, matrix({"HR"}, {acro}));
        const auto& b = model.coefficients[0];
        slope_sum += b.estimate;
        covered += b.ci_lo <= -5.27 && -5.27 <= b.ci_hi;
    }
    out.push_back({"95% CI covers the generating slope", covered >= 90,
                   fmt::format("{}/100 seeds (mean slope {:.3f})", covered, slope_sum / 100)});

    oracle::XorShift rng(8);
    std::vector<double> u(30), v(30);
    for (auto& x : u)
        x = rng.normal();
    for (auto& x : v)
        x = rng.normal();
    const auto vif = compute_vif(matrix({"a", "a_copy", "b"}, {u, u, v}));
    out.push_back({"VIF on duplicated feature", std::isinf(vif[0]) && std::isinf(vif[1]) && std::isfinite(vif[2]),
                   fmt::format("VIF {} {} {:.3f}", vif[0], vif[1], vif[2])});

    const std::vector<std::string> names{"CBT", "HR", "MeanRR", "RMSSD", "SkinT", "WatchAC"};
    std::size_t matched = 0, total = 0;
    for (int f = 0; f < 20; ++f) {
        const std::size_t n = 36;
        std::vector<std::vector<double>> cols(6, std::vector<double>(n));
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double common = rng.normal();
            for (std::size_t j = 0; j < 6; ++j)
                cols[j][i] = 0.3 * (f % 4) * common + rng.normal();
            y[i] = 0;
        }
        for (std::size_t j = 0; j < 6; ++j) {
            const double w = rng.normal();
            for (std::size_t i = 0; i < n; ++i)
                y[i] += w * cols[j][i];
        }
        for (auto& x : y)
            x += 2.0 * rng.normal();
        const auto x = matrix(names, cols);
        for (std::size_t k = 2; k <= 6; ++k) {
            double best = -1;
            std::vector<std::string> best_names;
            for (unsigned mask = 0; mask < 64; ++mask) {
                if (static_cast<std::size_t>(std::popcount(mask)) != k)
                    continue;
                oracle::Matrix sub;
                std::vector<std::string> sub_names;
                for (std::size_t j = 0; j < 6; ++j)
                    if (mask & (1u << j)) {
                        sub.push_back(cols[j]);
                        sub_names.push_back(names[j]);
                    }
                const double r2 = oracle::ols(sub, y).r2;
                if (r2 > best + 1e-12) {
                    best = r2;
                    best_names = sub_names;
                }
            }
            const auto sel = select_top_k(y, x, k);
            ++total;
            matched += sel.features == best_names && std::abs(sel.r_squared - best) <= 1e-10;
        }
    }
    out.push_back({"top-k vs exhaustive oracle", matched == total,
                   fmt::format("{}/{} (fixture, k) pairs", matched, total)});
    return out;
}

// 7 -------------------------------------------------------------------------

std::vector<Check> group_separation()
{
    std::size_t kw_ok = 0, me_ok = 0, ei_ok = 0, all_ok = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        synth::CohortOptions o;
        o.with_activity = o.with_rri = o.with_temperature = false;
        const auto rec = synth::generate_cohort(synth::demo_profiles(seed), o);
        std::vector<double> e, i, m;
        for (const auto& r : rec) {
            const double a =
                acrophase(*r.hr, r.collection_start, r.collection_end, r.profile.utc_offset_minutes * 60);
            switch (classify_chronotype(MeqScore::from_administrations(r.profile.id, r.meq).score)) {
            case ChronotypeGroup::evening: e.push_back(a); break;
            case ChronotypeGroup::intermediate: i.push_back(a); break;
            case ChronotypeGroup::morning: m.push_back(a); break;
            }
        }
        const bool kw = stats::kruskal_wallis(std::vector<std::vector<double>>{e, i, m}).p_value < 0.01;
        const bool me = stats::wilcoxon_rank_sum(m, e).p_value < 0.05;
        const bool ei = stats::wilcoxon_rank_sum(e, i).p_value >= 0.05;
        kw_ok += kw;
        me_ok += me;
        ei_ok += ei;
        all_ok += kw && me && ei;
    }
    return {{"KW p<0.01, M-vs-E significant, E-vs-I not", all_ok >= 80,
             fmt::format("{}/100 seeds jointly (KW {}, M-E {}, E-I {})", all_ok, kw_ok, me_ok, ei_ok)}};
}

// 8 -------------------------------------------------------------------------

pipeline::RunConfig demo_config(const fs::path& dir, int days)
{
    pipeline::RunConfig c;
    c.output_dir = dir / "data";
    c.manifest = dir / "data" / "manifest.json";
    c.seed = 2024;
    c.synth.days = days;
    return c;
}

std::vector<Check> determinism()
{
    const auto root = scratch("determinism");
    std::vector<fs::path> trees;
    for (const char* run : {"a", "b"}) {
        auto cfg = demo_config(root / run, 3);
        pipeline::cmd_synth(cfg);
        cfg.output_dir = root / run / "metrics";
        pipeline::cmd_metrics(cfg);
        trees.push_back(root / run);
    }
    std::size_t files = 0, differing = 0;
    for (const auto& f : fs::recursive_directory_iterator(trees[0])) {
        if (!f.is_regular_file())
            continue;
        ++files;
        const auto other = trees[1] / fs::relative(f.path(), trees[0]);
        differing += !fs::exists(other) || slurp(f.path()) != slurp(other);
    }
    std::size_t files_b = 0;
    for (const auto& f : fs::recursive_directory_iterator(trees[1]))
        files_b += f.is_regular_file();
    fs::remove_all(root);
    return {{"synth + metrics twice, same seed", files > 0 && differing == 0 && files == files_b,
             fmt::format("{} files, {} differing, {} vs {} in tree", files, differing, files, files_b)}};
}

// 9 -------------------------------------------------------------------------

std::map<std::string, double> acrophases(const fs::path& csv)
{
    std::map<std::string, double> out;
    std::istringstream in(slurp(csv));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        if (cells.size() == 4 && cells[2] == "acrophase" && !cells[3].empty())
            out[cells[0] + "/" + cells[1]] = std::stod(cells[3]);
    }
    return out;
}

std::vector<Check> missing_data()
{
    const auto root = scratch("missing");
    std::map<std::string, std::map<std::string, double>> runs;
    for (const auto& [tag, miss, charge] : {std::tuple{"complete", 0.0, 0.0}, std::tuple{"degraded", 0.10, 40.0}}) {
        auto cfg = demo_config(root / tag, 14);
        cfg.synth.missingness = miss;
        cfg.synth.charging_minutes_per_day = charge;
        pipeline::cmd_synth(cfg);
        cfg.output_dir = root / tag / "metrics";
        pipeline::cmd_metrics(cfg);
        runs[tag] = acrophases(cfg.output_dir / "rhythm_metrics.csv");
    }
    fs::remove_all(root);
    std::map<std::string, double> worst;
    double overall = 0;
    std::string worst_key;
    std::size_t compared = 0;
    for (const auto& [key, a] : runs["complete"]) {
        const auto it = runs["degraded"].find(key);
        if (it == runs["degraded"].end())
            continue;
        ++compared;
        const double d = circular_gap_h(a, it->second);
        const auto signal = key.substr(key.find('/') + 1);
        worst[signal] = std::max(worst[signal], d);
        if (d > overall) {
            overall = d;
            worst_key = key;
        }
    }
    std::string per;
    for (const auto& [s, d] : worst)
        per += fmt::format(" {}={:.3f}", s, d);
    return {{"acrophase shift, 10% missing + 40 min/day charging", compared > 0 && overall < 0.2,
             fmt::format("max {:.3f} h at {} over {} estimates; per signal:{}", overall, worst_key, compared, per)}};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> criteria{
        {1, "cosinor round trip", 5.0, cosinor_round_trip},
        {2, "cross-rate counts agreement", 30.0, cross_rate_counts},
        {3, "HRV correctness", 0.0, hrv_correctness},
        {4, "non-parametric metrics", 0.0, nonparametric},
        {5, "statistical tests vs oracles", 0.0, statistical_tests},
        {6, "regression recovery", 0.0, regression},
        {7, "group separation end-to-end", 120.0, group_separation},
        {8, "determinism", 0.0, determinism},
        {9, "missing-data robustness", 0.0, missing_data},
    };
    int only = 0;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
            only = std::atoi(argv[++i]);

    bool all_pass = true;
    for (const auto& c : criteria) {
        if (only && c.id != only)
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<Check> checks;
        try {
            checks = c.run();
        } catch (const std::exception& e) {
            checks.push_back({"exception", false, e.what()});
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit_s > 0)
            checks.push_back({"runtime", secs < c.limit_s, fmt::format("{:.2f} s (limit {} s)", secs, c.limit_s)});
        bool pass = true;
        for (const auto& k : checks)
            pass &= k.pass;
        all_pass &= pass;
        fmt::print("{} criterion {}: {} ({:.2f} s)\n", pass ? "PASS" : "FAIL", c.id, c.title, secs);
        for (const auto& k : checks)
            fmt::print("    [{}] {}: {}\n", k.pass ? "ok" : "FAIL", k.name, k.detail);
    }
    return all_pass ? 0 : 1;
}
