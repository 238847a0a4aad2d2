#include "circadian/chronotype.hpp"
#include "circadian/pipeline.hpp"
#include "circadian/stats.hpp"

#include "internal/parallel.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>

namespace circadian::pipeline {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string num(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (std::isnan(v))
        return "";
    return fmt::format("{:.10g}", v);
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

void log(const std::string& line) { std::cerr << line << '\n'; }

/// Collects the files a command writes and the notices it raises.
class Output {
public:
    explicit Output(fs::path dir) : dir_(std::move(dir))
    {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec)
            throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    void write(const std::string& name, const std::string& content)
    {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out)
            throw Error("cannot write " + (dir_ / name).string());
        out << content;
        if (!out)
            throw Error("error writing " + (dir_ / name).string());
        report.outputs.emplace_back(name);
    }

    void notice(const std::string& text)
    {
        log("notice: " + text);
        report.notices.push_back(text);
    }

    /// run_summary.json: config, hashed inputs and outputs, notices. No timestamps.
    void summary(const std::string& command, const RunConfig& cfg, const std::vector<std::pair<std::string, fs::path>>& inputs,
                 json extra = json::object())
    {
        json j;
        j["schema_version"] = 1;
        j["command"] = command;
        j["config"] = json::parse(config_to_json(cfg, false));
        json in = json::array();
        for (const auto& [name, path] : inputs)
            in.push_back({{"path", name}, {"sha256", sha256_file(path)}});
        j["inputs"] = in;
        json outs = json::array();
        for (const auto& name : report.outputs)
            outs.push_back({{"path", name.generic_string()}, {"sha256", sha256_file(dir_ / name)}});
        j["outputs"] = outs;
        j["notices"] = report.notices;
        for (auto& [k, v] : extra.items())
            j[k] = v;
        std::ofstream out(dir_ / "run_summary.json", std::ios::binary);
        out << j.dump(2) << '\n';
        if (!out)
            throw Error("error writing run_summary.json");
        report.outputs.emplace_back("run_summary.json");
    }

    CommandReport report;

private:
    fs::path dir_;
};

struct Cohort {
    Manifest manifest;
    std::vector<ParticipantData> participants;
};

Cohort load_cohort(const RunConfig& cfg)
{
    if (cfg.manifest.empty())
        throw Error("no manifest given (set \"manifest\" in the config or pass --manifest)");
    Cohort c;
    c.manifest = load_manifest(cfg.manifest);
    if (c.manifest.participants.empty())
        throw Error("manifest lists no participants");
    c.participants.resize(c.manifest.participants.size());
    log(fmt::format("preparing {} participants", c.participants.size()));
    detail::parallel_for(c.participants.size(), cfg.jobs, [&](std::size_t i) {
        c.participants[i] = prepare_participant(c.manifest, c.manifest.participants[i], cfg);
    });
    return c;
}

std::vector<std::pair<std::string, fs::path>> input_list(const Cohort& c, const RunConfig& cfg)
{
    std::vector<std::pair<std::string, fs::path>> out;
    out.emplace_back(cfg.manifest.filename().generic_string(), cfg.manifest);
    std::set<fs::path> seen;
    for (const auto& p : c.participants)
        for (const auto& path : p.inputs)
            if (seen.insert(path).second)
                out.emplace_back(fs::relative(path, c.manifest.base_dir).generic_string(), path);
    return out;
}

NonparametricOptions nonparam_options(const RunConfig& cfg, double offset_s)
{
    NonparametricOptions o;
    o.bin_s = cfg.nonparam_bin_s;
    o.m10l5 = cfg.m10l5;
    o.utc_offset_s = offset_s;
    o.min_days = cfg.min_days;
    return o;
}

json plot(const std::string& name, const std::string& file, const std::string& kind, const std::string& x,
          const std::string& y, const std::string& group)
{
    json p = {{"name", name}, {"file", file}, {"kind", kind}, {"x", x}, {"y", y}};
    if (!group.empty())
        p["series_by"] = group;
    return p;
}

void write_plots(Output& out, json plots)
{
    json j = {{"schema_version", 1}, {"plots", std::move(plots)}};
    out.write("plots.json", j.dump(2) + "\n");
}

} // namespace

std::string sha256_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot read " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw Error("sha256: digest initialisation failed");
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0)
            EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    std::string hex;
    for (unsigned int i = 0; i < len; ++i)
        hex += fmt::format("{:02x}", md[i]);
    return hex;
}

CommandReport cmd_synth(const RunConfig& cfg)
{
    cfg.validate();
    const auto& s = cfg.synth;
    std::vector<synth::SynthProfile> profiles =
        s.cohort == "demo" ? synth::demo_profiles(cfg.seed) : synth::linear_profiles(cfg.seed, s.participants);
    for (auto& p : profiles) {
        if (s.missingness)
            p.missingness = *s.missingness;
        if (s.charging_minutes_per_day)
            p.charging_minutes_per_day = *s.charging_minutes_per_day;
    }
    synth::CohortOptions opts;
    opts.days = s.days;
    opts.activity_mode = s.activity_mode;
    opts.meq = s.meq;
    opts.threads = cfg.jobs;
    log(fmt::format("generating {} participants over {} days", profiles.size(), s.days));
    const auto records = synth::generate_cohort(profiles, opts);
    Output out(cfg.output_dir);
    synth::write_dataset(cfg.output_dir, records, cfg.jobs);
    out.report.outputs.emplace_back("manifest.json");
    out.report.outputs.emplace_back("ground_truth.csv");
    for (const auto& r : records)
        for (const auto& [key, rel] : r.manifest_entry().signals)
            out.report.outputs.emplace_back(rel);
    out.summary("synth", cfg, {});
    return out.report;
}

CommandReport cmd_metrics(const RunConfig& cfg)
{
    cfg.validate();
    const Cohort cohort = load_cohort(cfg);
    Output out(cfg.output_dir);
    const std::size_t np = cohort.participants.size();

    // values[participant][signal] -> metrics
    std::vector<std::map<std::string, std::map<std::string, std::optional<double>>>> values(np);
    std::vector<std::vector<std::string>> notes(np);
    detail::parallel_for(np, cfg.jobs, [&](std::size_t i) {
        const auto& p = cohort.participants[i];
        for (const auto& signal : kSignals) {
            const auto it = p.epochs.find(signal);
            if (it == p.epochs.end())
                continue;
            try {
                const auto r = rhythm_metrics(minmax_normalize(it->second), p.utc_offset_s,
                                              nonparam_options(cfg, p.utc_offset_s));
                values[i][signal] = metric_values(r);
            } catch (const Error& e) {
                notes[i].push_back(p.id + ": " + signal + " metrics skipped: " + e.what());
            }
        }
    });
    for (std::size_t i = 0; i < np; ++i) {
        for (const auto& n : cohort.participants[i].notices)
            out.notice(n);
        for (const auto& n : notes[i])
            out.notice(n);
    }

    std::string csv = "participant,signal,metric,value\n";
    for (std::size_t i = 0; i < np; ++i)
        for (const auto& signal : kSignals) {
            const auto it = values[i].find(signal);
            if (it == values[i].end())
                continue;
            for (const auto& metric : kMetrics)
                csv += fmt::format("{},{},{},{}\n", cohort.participants[i].id, signal, metric, num(it->second.at(metric)));
        }
    out.write("rhythm_metrics.csv", csv);

    // Cohort table: medians (IQR) and agreement with the reference signal.
    const std::string& ref = cfg.reference_signal;
    stats::SignedRankOptions sr;
    sr.exact_max_n = cfg.exact_test_max_n;
    sr.threads = cfg.jobs;
    std::string table = "signal,metric,n,median,q1,q3,iqr,pearson_r,pearson_p,wilcoxon_w,wilcoxon_p,wilcoxon_method\n";
    for (const auto& signal : kSignals)
        for (const auto& metric : kMetrics) {
            std::vector<double> all, x, y;
            for (std::size_t i = 0; i < np; ++i) {
                const auto s = values[i].find(signal);
                if (s == values[i].end() || !s->second.at(metric))
                    continue;
                all.push_back(*s->second.at(metric));
                const auto r = values[i].find(ref);
                if (signal != ref && r != values[i].end() && r->second.at(metric)) {
                    x.push_back(*s->second.at(metric));
                    y.push_back(*r->second.at(metric));
                }
            }
            if (all.empty())
                continue;
            const double q1 = stats::quantile(all, 0.25), q3 = stats::quantile(all, 0.75);
            std::string pr, pp, ww, wp, wm;
            if (x.size() >= 3) {
                try {
                    const auto t = stats::pearson(x, y);
                    pr = num(t.statistic);
                    pp = num(t.p_value);
                } catch (const Error&) {
                }
            }
            if (!x.empty()) {
                try {
                    const auto t = stats::wilcoxon_signed_rank(x, y, sr);
                    ww = num(t.statistic);
                    wp = num(t.p_value);
                    wm = t.method;
                } catch (const Error&) {
                }
            }
            table += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", signal, metric, all.size(),
                                 num(stats::median(all)), num(q1), num(q3), num(q3 - q1), pr, pp, ww, wp, wm);
        }
    out.write("table1_summary.csv", table);

    std::string miss = "participant,device,miss_rate\n";
    std::string align = "participant,n_epochs,removed_both_fraction,removed_single_fraction\n";
    for (const auto& p : cohort.participants) {
        for (const auto& [device, rate] : p.miss_rates)
            miss += fmt::format("{},{},{}\n", p.id, device, num(rate));
        if (p.alignment)
            align += fmt::format("{},{},{},{}\n", p.id, p.alignment->n_epochs, num(p.alignment->removed_both_fraction),
                                 num(p.alignment->removed_single_fraction));
    }
    out.write("miss_rates.csv", miss);
    out.write("alignment.csv", align);
    out.summary("metrics", cfg, input_list(cohort, cfg));
    return out.report;
}

CommandReport cmd_agreement(const RunConfig& cfg, const std::string& signal_a, const std::string& signal_b)
{
    cfg.validate();
    for (const auto* s : {&signal_a, &signal_b})
        if (std::find(kSignals.begin(), kSignals.end(), *s) == kSignals.end())
            throw Error("agreement: unknown signal '" + *s + "'");
    const Cohort cohort = load_cohort(cfg);
    Output out(cfg.output_dir);
    for (const auto& p : cohort.participants)
        for (const auto& n : p.notices)
            out.notice(n);

    std::string per = "participant,n,pearson_r,pearson_p,slope,intercept,r_squared,bias,sd_diff,loa_lo,loa_hi\n";
    std::string pairs = "participant,t_unix_ms,a,b,mean,diff\n";
    std::vector<double> rs;
    std::vector<stats::RmObservation> pooled;
    for (const auto& p : cohort.participants) {
        const auto pick = [&](const std::string& name) -> const EpochSeries* {
            const bool minute = p.minute.count(signal_a) && p.minute.count(signal_b);
            const auto& src = minute ? p.minute : p.epochs;
            const auto it = src.find(name);
            return it == src.end() ? nullptr : &it->second;
        };
        const EpochSeries* a = pick(signal_a);
        const EpochSeries* b = pick(signal_b);
        if (!a || !b) {
            out.notice(p.id + ": agreement skipped, " + (!a ? signal_a : signal_b) + " missing");
            continue;
        }
        AlignResult al;
        try {
            al = align_series(*a, *b);
        } catch (const Error& e) {
            out.notice(p.id + ": agreement skipped, " + e.what());
            continue;
        }
        std::vector<double> x, y;
        for (std::size_t k = 0; k < al.a.size(); ++k)
            if (al.a.is_valid(k) && al.b.is_valid(k)) {
                x.push_back(al.a.values[k]);
                y.push_back(al.b.values[k]);
                pairs += fmt::format("{},{},{},{},{},{}\n", p.id, std::llround(al.a.epoch_start(k) * 1000.0),
                                     num(x.back()), num(y.back()), num(0.5 * (x.back() + y.back())),
                                     num(y.back() - x.back()));
                pooled.push_back({p.id, x.back(), y.back()});
            }
        if (x.size() < 3) {
            out.notice(p.id + ": agreement skipped, fewer than 3 overlapping epochs");
            continue;
        }
        const auto ba = stats::bland_altman(y, x);
        std::string r, pv, slope, icpt, r2;
        try {
            const auto t = stats::pearson(x, y);
            rs.push_back(t.statistic);
            r = num(t.statistic);
            pv = num(t.p_value);
            const double mx = stats::mean(x), my = stats::mean(y);
            double sxy = 0.0, sxx = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) {
                sxy += (x[k] - mx) * (y[k] - my);
                sxx += (x[k] - mx) * (x[k] - mx);
            }
            slope = num(sxy / sxx);
            icpt = num(my - sxy / sxx * mx);
            r2 = num(t.statistic * t.statistic);
        } catch (const Error& e) {
            out.notice(p.id + ": correlation undefined, " + e.what());
        }
        per += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", p.id, x.size(), r, pv, slope, icpt, r2, num(ba.bias),
                           num(ba.sd), num(ba.loa_lo), num(ba.loa_hi));
    }
    if (pooled.empty())
        throw Error("agreement: no overlapping data between " + signal_a + " and " + signal_b);

    std::string summary = "quantity,value\n";
    summary += fmt::format("signal_a,{}\nsignal_b,{}\nparticipants,{}\n", signal_a, signal_b, rs.size());
    summary += fmt::format("mean_r,{}\n", rs.empty() ? "" : num(stats::mean(rs)));
    summary += fmt::format("sd_r,{}\n", rs.size() < 2 ? "" : num(stats::sample_sd(rs)));
    try {
        const auto rm = stats::rm_corr(pooled);
        summary += fmt::format("rm_r,{}\nrm_df,{}\nrm_p,{}\nrm_ci_lo,{}\nrm_ci_hi,{}\n", num(rm.statistic), num(rm.df),
                               num(rm.p_value), num(rm.ci95 ? std::optional(rm.ci95->first) : std::nullopt),
                               num(rm.ci95 ? std::optional(rm.ci95->second) : std::nullopt));
    } catch (const Error& e) {
        out.notice(std::string("repeated-measures correlation skipped: ") + e.what());
    }
    out.write("agreement_participants.csv", per);
    out.write("agreement_summary.csv", summary);
    out.write("agreement_pairs.csv", pairs);
    write_plots(out, json::array({plot("bland_altman", "agreement_pairs.csv", "scatter", "mean", "diff", "participant"),
                                  plot("regression", "agreement_pairs.csv", "scatter", "a", "b", "participant"),
                                  plot("time_series", "agreement_pairs.csv", "line", "t_unix_ms", "a,b", "participant")}));
    out.summary("agreement", cfg, input_list(cohort, cfg), {{"signal_a", signal_a}, {"signal_b", signal_b}});
    return out.report;
}

CommandReport cmd_chronotype(const RunConfig& cfg)
{
    cfg.validate();
    const Cohort cohort = load_cohort(cfg);
    Output out(cfg.output_dir);
    for (const auto& p : cohort.participants)
        for (const auto& n : p.notices)
            out.notice(n);
    const std::size_t np = cohort.participants.size();

    // Acrophase per participant and feature.
    std::vector<std::map<std::string, double>> acro(np);
    std::vector<std::vector<std::string>> notes(np);
    detail::parallel_for(np, cfg.jobs, [&](std::size_t i) {
        const auto& p = cohort.participants[i];
        for (const auto& f : kChronotypeFeatures) {
            const auto it = p.epochs.find(f);
            if (it == p.epochs.end())
                continue;
            try {
                const auto fit = fit_cosinor(it->second, 24.0, p.utc_offset_s);
                if (fit.acrophase_defined)
                    acro[i][f] = fit.acrophase_hours;
                else
                    notes[i].push_back(p.id + ": " + f + " has no rhythm (zero amplitude)");
            } catch (const Error& e) {
                notes[i].push_back(p.id + ": " + f + " acrophase skipped: " + e.what());
            }
        }
    });
    for (const auto& list : notes)
        for (const auto& n : list)
            out.notice(n);

    struct Row {
        std::size_t index;
        MeqScore meq;
        ChronotypeGroup group;
    };
    std::vector<Row> rows;
    std::string meq_csv = "participant,meq,group,administrations\n";
    for (std::size_t i = 0; i < np; ++i) {
        const auto& entry = cohort.manifest.participants[i];
        if (entry.meq.empty()) {
            out.notice(entry.id + ": no MEQ scores, excluded");
            continue;
        }
        auto meq = MeqScore::from_administrations(entry.id, entry.meq);
        const auto g = classify_chronotype(meq.score);
        meq_csv += fmt::format("{},{},{},{}\n", entry.id, num(meq.score), to_string(g), meq.administrations.size());
        rows.push_back({i, std::move(meq), g});
    }
    if (rows.empty())
        throw Error("chronotype: no MEQ scores in the manifest");
    out.write("meq_scores.csv", meq_csv);

    const auto complete = [&](const std::vector<std::string>& features) {
        std::vector<const Row*> keep;
        for (const auto& r : rows)
            if (std::all_of(features.begin(), features.end(), [&](const auto& f) { return acro[r.index].count(f); }))
                keep.push_back(&r);
        return keep;
    };
    const auto matrix = [&](const std::vector<const Row*>& keep, const std::vector<std::string>& features) {
        FeatureMatrix fm;
        fm.names = features;
        fm.values.resize(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(features.size()));
        for (std::size_t i = 0; i < keep.size(); ++i)
            for (std::size_t j = 0; j < features.size(); ++j)
                fm.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acro[keep[i]->index].at(features[j]);
        return fm;
    };
    const auto response = [](const std::vector<const Row*>& keep) {
        std::vector<double> y;
        for (const auto* r : keep)
            y.push_back(r->meq.score);
        return y;
    };
    const auto controls_for = [&](const std::vector<const Row*>& keep) -> std::optional<FeatureMatrix> {
        FeatureMatrix c;
        c.names = {"age", "sex"};
        c.values.resize(static_cast<Eigen::Index>(keep.size()), 2);
        for (std::size_t i = 0; i < keep.size(); ++i) {
            const auto& e = cohort.manifest.participants[keep[i]->index];
            if (!e.age || !e.sex)
                return std::nullopt;
            c.values(static_cast<Eigen::Index>(i), 0) = *e.age;
            c.values(static_cast<Eigen::Index>(i), 1) = *e.sex;
        }
        return c;
    };

    std::string coef_csv = "model,controls,term,estimate,std_error,t,p_value,ci_lo,ci_hi,vif\n";
    std::string model_csv = "model,kind,controls,k,features,n,r_squared,adj_r_squared,f_statistic,f_infinite,df_model,"
                            "df_resid,f_p_value,residual_k2,residual_p,residuals_normal\n";
    const auto emit = [&](const std::string& id, const std::string& kind, const RegressionModel& m, bool controlled) {
        const std::string ctl = controlled ? "age_sex" : "none";
        std::string features;
        for (const auto& f : m.features)
            features += (features.empty() ? "" : ";") + f;
        model_csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", id, kind, ctl, m.features.size(),
                                 features, m.n, num(m.r_squared), num(m.adj_r_squared), num(m.f_statistic),
                                 m.f_infinite ? 1 : 0, num(m.df_model), num(m.df_resid), num(m.f_p_value),
                                 m.residual_normality ? num(m.residual_normality->statistic) : "",
                                 m.residual_normality ? num(m.residual_normality->p_value) : "",
                                 m.residual_normality ? (m.residuals_normal ? "1" : "0") : "");
        auto line = [&](const Coefficient& c) {
            coef_csv += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", id, ctl, c.name, num(c.estimate), num(c.std_error),
                                    num(c.t), num(c.p_value), num(c.ci_lo), num(c.ci_hi), num(c.vif));
        };
        line(m.intercept);
        for (const auto& c : m.coefficients)
            line(c);
    };
    const auto fit_both = [&](const std::string& id, const std::string& kind, const std::vector<const Row*>& keep,
                              const FeatureMatrix& x) -> std::optional<RegressionModel> {
        const auto y = response(keep);
        std::optional<RegressionModel> base;
        try {
            base = fit_ols(y, x);
            emit(id, kind, *base, false);
        } catch (const Error& e) {
            out.notice("model " + id + " skipped: " + e.what());
            return std::nullopt;
        }
        if (const auto c = controls_for(keep)) {
            try {
                emit(id, kind, fit_ols(y, x, c), true);
            } catch (const Error& e) {
                out.notice("model " + id + " with age/sex skipped: " + e.what());
            }
        } else {
            out.notice("model " + id + ": age/sex not available for every participant, sensitivity model skipped");
        }
        return base;
    };

    int model_no = 0;
    for (const auto& f : kChronotypeFeatures) {
        const auto keep = complete({f});
        ++model_no;
        if (keep.size() < 3) {
            out.notice("model " + std::to_string(model_no) + " (" + f + ") skipped: fewer than 3 participants");
            continue;
        }
        fit_both(std::to_string(model_no), "single", keep, matrix(keep, {f}));
    }

    std::vector<std::string> consumer;
    for (const auto& f : kChronotypeFeatures)
        if (f != cfg.reference_signal)
            consumer.push_back(f);
    const auto keep_multi = complete(consumer);
    std::optional<RegressionModel> largest;
    std::vector<std::string> largest_features;
    for (std::size_t k = 2; k <= std::min<std::size_t>(6, consumer.size()); ++k) {
        ++model_no;
        const std::string id = std::to_string(model_no);
        if (keep_multi.size() < k + 2) {
            out.notice("model " + id + " (k=" + std::to_string(k) + ") skipped: too few complete participants");
            continue;
        }
        try {
            const auto sel = select_top_k(response(keep_multi), matrix(keep_multi, consumer), k, cfg.jobs);
            if (auto m = fit_both(id, fmt::format("top_{}", k), keep_multi, matrix(keep_multi, sel.features))) {
                largest = std::move(m);
                largest_features = sel.features;
            }
        } catch (const Error& e) {
            out.notice("model " + id + " skipped: " + e.what());
        }
    }
    out.write("regression_models.csv", model_csv);
    out.write("regression_coefficients.csv", coef_csv);

    // Group comparison of acrophases.
    const ChronotypeGroup groups[] = {ChronotypeGroup::evening, ChronotypeGroup::intermediate, ChronotypeGroup::morning};
    std::string desc = "feature,group,n,median,q1,q3,iqr\n";
    std::string tests = "feature,comparison,test,statistic,p_value,df,status\n";
    for (const auto& f : kChronotypeFeatures) {
        std::vector<std::vector<double>> by(3);
        for (const auto& r : rows) {
            const auto it = acro[r.index].find(f);
            if (it != acro[r.index].end())
                by[static_cast<std::size_t>(r.group)].push_back(it->second);
        }
        for (std::size_t g = 0; g < 3; ++g) {
            if (by[g].empty()) {
                desc += fmt::format("{},{},0,,,,\n", f, to_string(groups[g]));
                continue;
            }
            const double q1 = stats::quantile(by[g], 0.25), q3 = stats::quantile(by[g], 0.75);
            desc += fmt::format("{},{},{},{},{},{},{}\n", f, to_string(groups[g]), by[g].size(), num(stats::median(by[g])),
                                num(q1), num(q3), num(q3 - q1));
        }
        const auto too_small = [&](std::initializer_list<std::size_t> need) {
            for (std::size_t g : need)
                if (by[g].size() < 3)
                    return std::optional<std::string>(to_string(groups[g]) + " has fewer than 3 participants");
            return std::optional<std::string>();
        };
        if (const auto why = too_small({0, 1, 2})) {
            tests += fmt::format("{},E-I-M,kruskal_wallis,,,,skipped: {}\n", f, *why);
            out.notice(f + ": Kruskal-Wallis skipped, " + *why);
        } else {
            const auto t = stats::kruskal_wallis(by);
            tests += fmt::format("{},E-I-M,kruskal_wallis,{},{},{},ok\n", f, num(t.statistic), num(t.p_value), num(t.df));
        }
        const std::pair<std::size_t, std::size_t> pairs_ix[] = {{0, 1}, {1, 2}, {0, 2}};
        for (const auto& [ga, gb] : pairs_ix) {
            const std::string label = fmt::format("{}-{}", to_string(groups[ga]).substr(0, 1), to_string(groups[gb]).substr(0, 1));
            if (const auto why = too_small({ga, gb})) {
                tests += fmt::format("{},{},rank_sum,,,,skipped: {}\n", f, label, *why);
                out.notice(f + ": rank-sum " + label + " skipped, " + *why);
                continue;
            }
            const auto t = stats::wilcoxon_rank_sum(by[ga], by[gb]);
            tests += fmt::format("{},{},rank_sum,{},{},,ok\n", f, label, num(t.statistic), num(t.p_value));
        }
    }
    out.write("group_descriptives.csv", desc);
    out.write("group_tests.csv", tests);

    // PCA biplot data over all features.
    const auto keep_pca = complete(kChronotypeFeatures);
    if (keep_pca.size() >= 3) {
        try {
            const auto pca = pca_biplot_data(matrix(keep_pca, kChronotypeFeatures));
            std::string load = "feature";
            for (std::size_t c = 0; c < pca.eigenvalues.size(); ++c)
                load += fmt::format(",pc{}", c + 1);
            load += "\n";
            for (std::size_t j = 0; j < pca.names.size(); ++j) {
                load += pca.names[j];
                for (Eigen::Index c = 0; c < pca.loadings.cols(); ++c)
                    load += "," + num(pca.loadings(static_cast<Eigen::Index>(j), c));
                load += "\n";
            }
            std::string scores = "participant,meq,group,pc1,pc2\n";
            for (std::size_t i = 0; i < keep_pca.size(); ++i)
                scores += fmt::format("{},{},{},{},{}\n", keep_pca[i]->meq.participant, num(keep_pca[i]->meq.score),
                                      to_string(keep_pca[i]->group), num(pca.scores(static_cast<Eigen::Index>(i), 0)),
                                      num(pca.scores(static_cast<Eigen::Index>(i), 1)));
            std::string var = "component,eigenvalue,explained_variance\n";
            for (std::size_t c = 0; c < pca.eigenvalues.size(); ++c)
                var += fmt::format("pc{},{},{}\n", c + 1, num(pca.eigenvalues[c]), num(pca.explained_variance[c]));
            out.write("pca_loadings.csv", load);
            out.write("pca_scores.csv", scores);
            out.write("pca_variance.csv", var);
        } catch (const Error& e) {
            out.notice(std::string("PCA skipped: ") + e.what());
        }
    } else {
        out.notice("PCA skipped: fewer than 3 participants with every feature");
    }

    // Pairwise correlations of the largest model's features and its MEQ predictions.
    if (largest) {
        std::vector<std::string> names = largest_features;
        names.emplace_back("MEQ_pred");
        std::vector<std::vector<double>> cols;
        for (const auto& f : largest_features) {
            std::vector<double> c;
            for (const auto* r : keep_multi)
                c.push_back(acro[r->index].at(f));
            cols.push_back(std::move(c));
        }
        cols.push_back(largest->fitted);
        std::string corr = "var_a,var_b,n,r,p_value\n";
        for (std::size_t a = 0; a < names.size(); ++a)
            for (std::size_t b = 0; b < names.size(); ++b) {
                std::string r, p;
                if (a == b) {
                    r = "1";
                } else {
                    try {
                        const auto t = stats::pearson(cols[a], cols[b]);
                        r = num(t.statistic);
                        p = num(t.p_value);
                    } catch (const Error&) {
                    }
                }
                corr += fmt::format("{},{},{},{},{}\n", names[a], names[b], cols[a].size(), r, p);
            }
        out.write("correlation_matrix.csv", corr);
    }

    write_plots(out, json::array({plot("pca_biplot_scores", "pca_scores.csv", "scatter", "pc1", "pc2", "group"),
                                  plot("pca_biplot_loadings", "pca_loadings.csv", "vectors", "pc1", "pc2", ""),
                                  plot("correlation_matrix", "correlation_matrix.csv", "heatmap", "var_a", "var_b", "")}));
    out.summary("chronotype", cfg, input_list(cohort, cfg));
    return out.report;
}

} // namespace circadian::pipeline
