// acore: experiment runner for classifier-based confidence sets.
//
//   acore <command> --config FILE [--seed N] [--out DIR] [--threads N]
//
// Every command writes CSV files, manifest.txt and timing.txt into the output
// directory.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "acore/error.hpp"
#include "acore/experiment.hpp"
#include "acore/io.hpp"
#include "acore/oracle.hpp"

namespace {

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::size_t threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config, "Experiment config file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", opts.seed, "Override the master seed");
    cmd->add_option("--out", opts.out, "Output directory (overrides experiment.out)");
    cmd->add_option("--threads", opts.threads, "Worker threads (overrides experiment.threads)")
        ->check(CLI::PositiveNumber);
}

acore::ExperimentConfig load(const CommonOptions& opts) {
    auto kv = acore::KeyValueConfig::load(opts.config);
    if (opts.seed) kv.set("model.seed", std::to_string(*opts.seed));
    if (!opts.out.empty()) kv.set("experiment.out", opts.out);
    auto cfg = acore::load_experiment_config(kv);
    if (opts.threads > 0) cfg.threads = opts.threads;
    return cfg;
}

void finish(const acore::ExperimentConfig& cfg, const std::string& command, const acore::StageTimer& timer) {
    auto manifest = acore::open_output(cfg.out_dir / "manifest.txt");
    acore::write_manifest(manifest, cfg, command);
    auto timing = acore::open_output(cfg.out_dir / "timing.txt");
    timer.report(timing);
    timer.report(std::cerr);
}

acore::OddsModel odds_for(const acore::ExperimentConfig& cfg, const std::string& odds_path, bool exact,
                          acore::Rng& rng, acore::StageTimer& timer) {
    if (exact) return acore::exact_odds_model(cfg.model, cfg.p);
    if (!odds_path.empty()) {
        std::ifstream in(odds_path);
        if (!in) throw acore::ConfigError("cannot open odds model '" + odds_path + "'");
        return acore::load_odds(in, cfg.model);
    }
    const auto sample = timer.time("labeled sample", [&] {
        return acore::generate_labeled_sample(cfg.model, cfg.b_list.front(), cfg.p, rng, cfg.threads);
    });
    return timer.time("odds training",
                      [&] { return acore::train_odds(sample, cfg.classifiers.front(), cfg.model, rng); });
}

int cmd_simulate(const CommonOptions& opts) {
    const auto cfg = load(opts);
    acore::StageTimer timer;
    acore::Rng rng(cfg.seed);
    const auto set = timer.time("labeled sample", [&] {
        return acore::generate_labeled_sample(cfg.model, cfg.b_list.front(), cfg.p, rng, cfg.threads);
    });
    auto out = acore::open_output(cfg.out_dir / "labeled.csv");
    acore::write_labeled_csv(out, set);
    finish(cfg, "simulate", timer);
    return 0;
}

int cmd_train_odds(const CommonOptions& opts, const std::string& input) {
    const auto cfg = load(opts);
    acore::StageTimer timer;
    acore::Rng rng(cfg.seed);
    acore::LabeledSet sample;
    if (!input.empty()) {
        std::ifstream in(input);
        if (!in) throw acore::ConfigError("cannot open labeled sample '" + input + "'");
        sample = acore::read_labeled_csv(in);
    } else {
        sample = timer.time("labeled sample", [&] {
            return acore::generate_labeled_sample(cfg.model, cfg.b_list.front(), cfg.p, rng, cfg.threads);
        });
    }
    const auto& spec = cfg.classifiers.front();
    const auto odds = timer.time("odds training", [&] { return acore::train_odds(sample, spec, cfg.model, rng); });
    auto model_out = acore::open_output(cfg.out_dir / "odds_model.txt");
    odds.save(model_out);

    acore::Rng holdout_rng(acore::derive_seed(cfg.seed, 0x686f6c64ULL));
    const auto holdout = acore::generate_labeled_sample(cfg.model, cfg.holdout, cfg.p, holdout_rng, cfg.threads);
    const auto terms = acore::cross_entropy_terms(odds, holdout);
    double mean = 0.0, var = 0.0;
    for (double t : terms) mean += t / static_cast<double>(terms.size());
    for (double t : terms) var += (t - mean) * (t - mean) / static_cast<double>(terms.size() - 1);
    auto ce = acore::open_output(cfg.out_dir / "cross_entropy.csv");
    acore::write_csv_row(ce, {"classifier", "B", "loss_mean", "loss_sd"});
    acore::write_csv_row(ce, {spec.label(), std::to_string(sample.size()), acore::format_real(mean),
                              acore::format_real(std::sqrt(var))});
    finish(cfg, "train-odds", timer);
    return 0;
}

int cmd_critical(const CommonOptions& opts, const std::string& odds_path, bool exact) {
    const auto cfg = load(opts);
    acore::StageTimer timer;
    acore::Rng rng(cfg.seed);
    const auto odds = odds_for(cfg, odds_path, exact, rng, timer);
    const auto taus = timer.time("tau simulation", [&] {
        return acore::simulate_tau_set(odds, cfg.b_prime, acore::NullMode::pointwise, rng, cfg.threads);
    });
    const auto qm =
        timer.time("quantile fit", [&] { return acore::fit_quantile(taus, cfg.alpha, cfg.quantile_kind, cfg.boosting); });
    const auto surface = acore::critical_surface(qm, cfg.model.params);
    auto tau_out = acore::open_output(cfg.out_dir / "tau_set.csv");
    acore::write_tau_csv(tau_out, taus);
    auto surface_out = acore::open_output(cfg.out_dir / "critical_surface.csv");
    acore::write_surface_csv(surface_out, cfg.model.params, surface);
    auto qm_out = acore::open_output(cfg.out_dir / "quantile_model.txt");
    qm.save(qm_out);
    finish(cfg, "critical", timer);
    return 0;
}

int cmd_confset(const CommonOptions& opts, const std::string& odds_path, const std::string& quantile_path,
                const std::string& data_path, bool exact) {
    const auto cfg = load(opts);
    acore::StageTimer timer;
    acore::Rng rng(cfg.seed);
    const auto odds = odds_for(cfg, odds_path, exact, rng, timer);

    std::vector<double> surface;
    if (!quantile_path.empty()) {
        std::ifstream in(quantile_path);
        if (!in) throw acore::ConfigError("cannot open quantile model '" + quantile_path + "'");
        surface = acore::critical_surface(acore::QuantileModel::load(in), cfg.model.params);
    } else {
        surface = acore::calibrate(odds, cfg.b_prime, cfg.alpha, cfg.quantile_kind, cfg.boosting, rng, cfg.threads,
                                   &timer)
                      .surface;
    }

    acore::Dataset data;
    if (!data_path.empty()) {
        std::ifstream in(data_path);
        if (!in) throw acore::ConfigError("cannot open data '" + data_path + "'");
        data = acore::read_observations_csv(in);
    } else {
        acore::Rng data_rng(acore::derive_seed(cfg.seed, 0x6f6273ULL));
        data = acore::simulate(cfg.model, cfg.model.true_theta, cfg.model.n_obs, data_rng);
    }
    const auto set = timer.time("inversion", [&] { return acore::confidence_set(odds, surface, data, cfg.alpha); });

    auto out = acore::open_output(cfg.out_dir / "confidence_set.csv");
    acore::write_confidence_csv(out, cfg.model.params, set);
    auto data_out = acore::open_output(cfg.out_dir / "observed.csv");
    acore::write_observations_csv(data_out, data);
    std::printf("accepted %zu of %zu grid points (%.1f%%)\n", set.accepted.size(), cfg.model.params.grid_size(),
                100.0 * set.size_fraction);
    finish(cfg, "confset", timer);
    return 0;
}

int cmd_diagnose(const CommonOptions& opts) {
    const auto cfg = load(opts);
    acore::StageTimer timer;
    const auto runs = acore::run_coverage_diagnostic(cfg, &timer);
    auto summary = acore::open_output(cfg.out_dir / "diagnostic_summary.csv");
    acore::write_csv_row(summary, {"b_prime", "passed", "outside_band_points", "undercovered_points", "raw_coverage", "shrunk"});
    for (const auto& run : runs) {
        acore::write_csv_row(summary, {std::to_string(run.b_prime), run.report.passed ? "1" : "0",
                                       std::to_string(run.report.outside_count()),
                                       std::to_string(run.report.undercovered_count()),
                                       acore::format_real(run.raw_mean), run.report.shrunk ? "1" : "0"});
        auto curve = acore::open_output(cfg.out_dir / ("coverage_Bprime" + std::to_string(run.b_prime) + ".csv"));
        acore::write_coverage_csv(curve, run.report);
        if (cfg.model.params.dim() == 2) {
            auto heat = acore::open_output(cfg.out_dir / ("coverage_heatmap_Bprime" + std::to_string(run.b_prime) + ".csv"));
            acore::write_coverage_heatmap(heat, cfg.model.params, run.report);
        }
        std::printf("B'=%zu %s (%zu grid points outside the band, %zu undercovered)\n", run.b_prime,
                    run.report.passed ? "pass" : "FAIL", run.report.outside_count(), run.report.undercovered_count());
    }
    finish(cfg, "diagnose", timer);
    return 0;
}

int cmd_table_sweep(const CommonOptions& opts) {
    const auto cfg = load(opts);
    acore::StageTimer timer;
    const auto rows = acore::run_table_sweep(cfg, &timer);
    auto out = acore::open_output(cfg.out_dir / "table_sweep.csv");
    acore::write_sweep_csv(out, rows);
    acore::write_sweep_csv(std::cout, rows);
    finish(cfg, "table-sweep", timer);
    return 0;
}

int cmd_region_2d(const CommonOptions& opts) {
    const auto cfg = load(opts);
    acore::StageTimer timer;
    const auto result = acore::run_2d_region(cfg, &timer);
    auto grid = acore::open_output(cfg.out_dir / "region.csv");
    acore::write_region_csv(grid, cfg.model.params, result);
    auto summary = acore::open_output(cfg.out_dir / "region_summary.csv");
    acore::write_region_summary_csv(summary, result);
    acore::write_region_summary_csv(std::cout, result);
    auto data_out = acore::open_output(cfg.out_dir / "observed.csv");
    acore::write_observations_csv(data_out, result.observed);
    finish(cfg, "region-2d", timer);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"acore: confidence sets from classifier-estimated odds"};
    app.require_subcommand(1);
    app.set_version_flag("--version", acore::version());

    CommonOptions opts;
    std::string odds_path, quantile_path, data_path, input;
    bool exact = false;

    auto* simulate = app.add_subcommand("simulate", "Write a labeled training sample (size: first B)");
    add_common(simulate, opts);

    auto* train = app.add_subcommand("train-odds", "Train the first configured classifier and save it");
    add_common(train, opts);
    train->add_option("--input", input, "Labeled sample CSV to train on")->check(CLI::ExistingFile);

    auto* critical = app.add_subcommand("critical", "Fit the critical-value surface for an odds model");
    add_common(critical, opts);
    critical->add_option("--odds", odds_path, "Saved odds model")->check(CLI::ExistingFile);
    critical->add_flag("--exact", exact, "Use the exact-odds oracle");

    auto* confset = app.add_subcommand("confset", "Build one confidence set");
    add_common(confset, opts);
    confset->add_option("--odds", odds_path, "Saved odds model")->check(CLI::ExistingFile);
    confset->add_option("--quantile", quantile_path, "Saved quantile model")->check(CLI::ExistingFile);
    confset->add_option("--data", data_path, "Observed data CSV (default: simulated at the true theta)")
        ->check(CLI::ExistingFile);
    confset->add_flag("--exact", exact, "Use the exact-odds oracle");

    auto* diagnose = app.add_subcommand("diagnose", "Coverage diagnostic for each B' in experiment.b_prime_list");
    add_common(diagnose, opts);

    auto* sweep = app.add_subcommand("table-sweep", "Cross-entropy, power, size and coverage per (classifier, B)");
    add_common(sweep, opts);

    auto* region = app.add_subcommand("region-2d", "Two-parameter confidence regions against the exact oracle");
    add_common(region, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*simulate) return cmd_simulate(opts);
        if (*train) return cmd_train_odds(opts, input);
        if (*critical) return cmd_critical(opts, odds_path, exact);
        if (*confset) return cmd_confset(opts, odds_path, quantile_path, data_path, exact);
        if (*diagnose) return cmd_diagnose(opts);
        if (*sweep) return cmd_table_sweep(opts);
        if (*region) return cmd_region_2d(opts);
    } catch (const acore::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
