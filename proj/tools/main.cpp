#include "circadian/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace pl = circadian::pipeline;

namespace {

struct CommonFlags {
    std::string config;
    std::string out;
    std::string manifest;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
};

void add_common(CLI::App* cmd, CommonFlags& f)
{
    cmd->add_option("--config", f.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--seed", f.seed, "Random seed");
    cmd->add_option("--jobs", f.jobs, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
}

pl::RunConfig resolve(const CommonFlags& f)
{
    pl::RunConfig cfg = f.config.empty() ? pl::RunConfig{} : pl::load_config(f.config);
    if (!f.out.empty())
        cfg.output_dir = f.out;
    if (!f.manifest.empty())
        cfg.manifest = f.manifest;
    if (f.seed)
        cfg.seed = *f.seed;
    if (f.jobs)
        cfg.jobs = *f.jobs;
    cfg.validate();
    return cfg;
}

void print(const pl::CommandReport& r, const pl::RunConfig& cfg)
{
    std::cerr << "wrote " << r.outputs.size() << " files to " << cfg.output_dir.string();
    if (!r.notices.empty())
        std::cerr << " (" << r.notices.size() << " notices, see run_summary.json)";
    std::cerr << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Circadian rhythm metrics from wearable recordings"};
    app.require_subcommand(1);

    CommonFlags synth_f, metrics_f, agree_f, chrono_f;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort (CSVs + manifest)");
    add_common(synth, synth_f);
    int days = 0;
    synth->add_option("--days", days, "Recording length in days (overrides the config)");

    auto* metrics = app.add_subcommand("metrics", "Rhythm metrics per participant and signal, cohort summary");
    add_common(metrics, metrics_f);
    metrics->add_option("--manifest", metrics_f.manifest, "Cohort manifest (overrides the config)");

    auto* agree = app.add_subcommand("agreement", "Device agreement between two signals");
    add_common(agree, agree_f);
    agree->add_option("--manifest", agree_f.manifest, "Cohort manifest (overrides the config)");
    std::string signal_a = "ActiAC", signal_b = "WatchAC";
    agree->add_option("--signal-a", signal_a, "Reference signal")->capture_default_str();
    agree->add_option("--signal-b", signal_b, "Compared signal")->capture_default_str();

    auto* chrono = app.add_subcommand("chronotype", "MEQ regression, group comparison, PCA");
    add_common(chrono, chrono_f);
    chrono->add_option("--manifest", chrono_f.manifest, "Cohort manifest (overrides the config)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            auto cfg = resolve(synth_f);
            if (days != 0)
                cfg.synth.days = days;
            print(pl::cmd_synth(cfg), cfg);
        } else if (metrics->parsed()) {
            const auto cfg = resolve(metrics_f);
            print(pl::cmd_metrics(cfg), cfg);
        } else if (agree->parsed()) {
            const auto cfg = resolve(agree_f);
            print(pl::cmd_agreement(cfg, signal_a, signal_b), cfg);
        } else if (chrono->parsed()) {
            const auto cfg = resolve(chrono_f);
            print(pl::cmd_chronotype(cfg), cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
