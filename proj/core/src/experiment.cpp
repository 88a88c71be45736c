#include "acore/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "acore/error.hpp"
#include "acore/io.hpp"
#include "acore/oracle.hpp"
#include "acore/parallel.hpp"

#ifndef ACORE_VERSION
#define ACORE_VERSION "0.0.0"
#endif

namespace acore {

const char* version() noexcept { return ACORE_VERSION; }

void StageTimer::add(const std::string& stage, double seconds) {
    std::lock_guard lock(mutex_);
    for (auto& s : stages_) {
        if (s.name == stage) {
            s.seconds += seconds;
            ++s.calls;
            return;
        }
    }
    stages_.push_back({stage, seconds, 1});
}

std::vector<StageTimer::Stage> StageTimer::stages() const {
    std::lock_guard lock(mutex_);
    return stages_;
}

double StageTimer::total() const {
    double t = 0.0;
    for (const auto& s : stages()) t += s.seconds;
    return t;
}

void StageTimer::report(std::ostream& out) const {
    char buf[160];
    for (const auto& s : stages()) {
        std::snprintf(buf, sizeof buf, "%-24s %10.3f s  (%zu calls)\n", s.name.c_str(), s.seconds, s.calls);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "%-24s %10.3f s\n", "total", total());
    out << buf;
}

namespace {

template <class Fn>
decltype(auto) timed(StageTimer* timer, const std::string& stage, Fn&& fn) {
    if (timer) return timer->time(stage, std::forward<Fn>(fn));
    return fn();
}

std::size_t line_of(const KeyValueConfig& cfg, const std::string& key) {
    const auto* e = cfg.find(key);
    return e ? e->line : 0;
}

std::size_t positive(const KeyValueConfig& cfg, const std::string& key, std::size_t fallback) {
    const auto v = cfg.get_u64(key, fallback);
    if (v < 1) throw ConfigError("'" + key + "' must be positive", line_of(cfg, key));
    return static_cast<std::size_t>(v);
}

std::vector<std::size_t> positive_list(const KeyValueConfig& cfg, const std::string& key,
                                       std::vector<std::size_t> fallback) {
    if (!cfg.has(key)) return fallback;
    std::vector<std::size_t> out;
    for (auto v : cfg.get_counts(key)) {
        if (v < 1) throw ConfigError("'" + key + "' entries must be positive", line_of(cfg, key));
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw ConfigError("'" + key + "' is empty", line_of(cfg, key));
    return out;
}

std::vector<std::string> split_names(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',') {
            const auto b = cur.find_first_not_of(" \t");
            const auto e = cur.find_last_not_of(" \t");
            if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

struct RepOutcome {
    double ce = 0.0;
    double power = 0.0;
    double size = 0.0;
    double covered = 0.0;
};

SweepRow summarize(std::string label, std::size_t b, const std::vector<RepOutcome>& reps) {
    std::vector<double> ce, power, size, covered;
    for (const auto& r : reps) {
        ce.push_back(r.ce);
        power.push_back(r.power);
        size.push_back(r.size);
        covered.push_back(r.covered);
    }
    SweepRow row;
    row.classifier = std::move(label);
    row.b = b;
    row.ce_mean = mean_of(ce);
    row.ce_sd = sd_of(ce);
    row.power = mean_of(power);
    row.power_sd = sd_of(power);
    row.size_mean = mean_of(size);
    row.size_sd = sd_of(size);
    row.coverage = mean_of(covered);
    row.reps = reps.size();
    return row;
}

RepOutcome score_rep(const ExperimentConfig& cfg, const OddsModel& odds, std::span<const double> surface,
                     Rng& rng, StageTimer* timer) {
    const auto& model = cfg.model;
    RepOutcome out;
    const auto holdout = generate_labeled_sample(model, cfg.holdout, cfg.p, rng);
    out.ce = cross_entropy(odds, holdout);
    const auto data = simulate(model, model.true_theta, model.n_obs, rng);
    const auto set = timed(timer, "inversion", [&] { return confidence_set(odds, surface, data, cfg.alpha); });
    const auto truth = model.params.nearest_index(model.true_theta);
    out.power = set_power(set, truth);
    out.size = 100.0 * set.size_fraction;
    out.covered = set.contains(truth) ? 1.0 : 0.0;
    return out;
}

} // namespace

ExperimentConfig load_experiment_config(const KeyValueConfig& cfg) {
    std::set<std::string> known;
    for (auto& k : model_config_keys()) known.insert(k);
    for (const char* k : {"seed", "experiment.classifiers", "experiment.B", "experiment.p", "experiment.b_prime",
                          "experiment.b_dd", "experiment.alpha", "experiment.n_reps", "experiment.holdout",
                          "experiment.exact_critical_reps", "experiment.include_exact", "experiment.b_prime_list",
                          "experiment.diagnostic_B", "experiment.out", "experiment.threads", "mlp.hidden_units",
                          "mlp.learning_rate", "mlp.max_epochs", "mlp.batch_size", "mlp.validation_fraction",
                          "mlp.patience", "mlp.tolerance", "mlp.weight_penalty", "qda.covariance_loading",
                          "knn.neighbours", "logistic.gradient_tolerance", "logistic.max_iterations",
                          "quantile.kind", "quantile.trees", "quantile.max_depth", "quantile.learning_rate",
                          "quantile.min_leaf", "quantile.neighbours", "region.B", "region.exact_reps"})
        known.insert(k);
    cfg.require_known(known);

    ExperimentConfig out;
    auto mc = load_model_config(cfg);
    out.model = std::move(mc.model);
    out.seed = mc.seed;
    out.config_text = cfg.text();

    ClassifierSpec base;
    base.hidden_units = positive(cfg, "mlp.hidden_units", base.hidden_units);
    base.learning_rate = cfg.get_double("mlp.learning_rate", base.learning_rate);
    base.max_epochs = positive(cfg, "mlp.max_epochs", base.max_epochs);
    base.batch_size = positive(cfg, "mlp.batch_size", base.batch_size);
    base.validation_fraction = cfg.get_double("mlp.validation_fraction", base.validation_fraction);
    base.patience = positive(cfg, "mlp.patience", base.patience);
    base.tolerance = cfg.get_double("mlp.tolerance", base.tolerance);
    base.weight_penalty = cfg.get_double("mlp.weight_penalty", base.weight_penalty);
    base.covariance_loading = cfg.get_double("qda.covariance_loading", base.covariance_loading);
    base.neighbours = static_cast<std::size_t>(cfg.get_u64("knn.neighbours", 0));
    base.gradient_tolerance = cfg.get_double("logistic.gradient_tolerance", base.gradient_tolerance);
    base.max_iterations = positive(cfg, "logistic.max_iterations", base.max_iterations);
    try {
        base.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }

    const auto names = split_names(cfg.get_string("experiment.classifiers", "qda"));
    if (names.empty()) throw ConfigError("no classifiers configured", line_of(cfg, "experiment.classifiers"));
    for (const auto& name : names) {
        ClassifierSpec spec = base;
        try {
            spec.kind = parse_classifier_kind(name);
        } catch (const ConfigError& e) {
            throw ConfigError(e.what(), line_of(cfg, "experiment.classifiers"));
        }
        out.classifiers.push_back(spec);
    }

    out.b_list = positive_list(cfg, "experiment.B", out.b_list);
    out.p = cfg.get_double("experiment.p", out.p);
    if (!(out.p > 0.0 && out.p < 1.0))
        throw ConfigError("experiment.p must be in (0, 1)", line_of(cfg, "experiment.p"));
    out.b_prime = positive(cfg, "experiment.b_prime", out.b_prime);
    if (out.b_prime < 50) throw ConfigError("experiment.b_prime must be at least 50", line_of(cfg, "experiment.b_prime"));
    out.b_dd = positive(cfg, "experiment.b_dd", out.b_dd);
    out.alpha = cfg.get_double("experiment.alpha", out.alpha);
    if (!(out.alpha > 0.0 && out.alpha < 1.0))
        throw ConfigError("experiment.alpha must be in (0, 1)", line_of(cfg, "experiment.alpha"));
    out.n_reps = positive(cfg, "experiment.n_reps", out.n_reps);
    out.holdout = positive(cfg, "experiment.holdout", out.holdout);
    out.exact_critical_reps = positive(cfg, "experiment.exact_critical_reps", out.exact_critical_reps);
    if (out.exact_critical_reps < 100)
        throw ConfigError("experiment.exact_critical_reps must be at least 100",
                          line_of(cfg, "experiment.exact_critical_reps"));
    const auto include = cfg.get_string("experiment.include_exact", "true");
    if (include != "true" && include != "false")
        throw ConfigError("experiment.include_exact must be true or false", line_of(cfg, "experiment.include_exact"));
    out.include_exact = include == "true";
    out.b_prime_list = positive_list(cfg, "experiment.b_prime_list", out.b_prime_list);
    for (auto v : out.b_prime_list)
        if (v < 50) throw ConfigError("B' values must be at least 50", line_of(cfg, "experiment.b_prime_list"));
    out.diagnostic_b = positive(cfg, "experiment.diagnostic_B", out.b_list.back());
    out.out_dir = cfg.get_string("experiment.out", out.out_dir.string());
    out.threads = positive(cfg, "experiment.threads", out.threads);

    try {
        out.quantile_kind = parse_quantile_kind(cfg.get_string("quantile.kind", "boosted_trees"));
    } catch (const ConfigError& e) {
        throw ConfigError(e.what(), line_of(cfg, "quantile.kind"));
    }
    out.boosting.trees = positive(cfg, "quantile.trees", out.boosting.trees);
    out.boosting.max_depth = positive(cfg, "quantile.max_depth", out.boosting.max_depth);
    out.boosting.learning_rate = cfg.get_double("quantile.learning_rate", out.boosting.learning_rate);
    if (!(out.boosting.learning_rate > 0.0 && out.boosting.learning_rate <= 1.0))
        throw ConfigError("quantile.learning_rate must be in (0, 1]", line_of(cfg, "quantile.learning_rate"));
    out.boosting.min_leaf = positive(cfg, "quantile.min_leaf", out.boosting.min_leaf);
    out.boosting.neighbours = static_cast<std::size_t>(cfg.get_u64("quantile.neighbours", 0));

    out.region_b_list = positive_list(cfg, "region.B", out.region_b_list);
    out.region_exact_reps = positive(cfg, "region.exact_reps", out.region_exact_reps);
    if (out.region_exact_reps < 100)
        throw ConfigError("region.exact_reps must be at least 100", line_of(cfg, "region.exact_reps"));
    return out;
}

Calibration calibrate(const OddsModel& odds, std::size_t b_prime, double alpha, QuantileKind kind,
                      const BoostingSpec& boosting, Rng& rng, std::size_t threads, StageTimer* timer) {
    const auto taus = timed(timer, "tau simulation", [&] {
        return simulate_tau_set(odds, b_prime, NullMode::pointwise, rng, threads);
    });
    auto qm = timed(timer, "quantile fit", [&] { return fit_quantile(taus, alpha, kind, boosting); });
    auto surface = critical_surface(qm, odds.model().params);
    return {std::move(qm), std::move(surface)};
}

Pipeline build_pipeline(const ExperimentConfig& cfg, const ClassifierSpec& classifier, std::size_t b, Rng& rng,
                        std::size_t threads, StageTimer* timer) {
    const auto sample = timed(timer, "labeled sample",
                              [&] { return generate_labeled_sample(cfg.model, b, cfg.p, rng, threads); });
    auto odds = timed(timer, "odds training", [&] { return train_odds(sample, classifier, cfg.model, rng); });
    auto cal = calibrate(odds, cfg.b_prime, cfg.alpha, cfg.quantile_kind, cfg.boosting, rng, threads, timer);
    return {std::move(odds), std::move(cal)};
}

SweepRow run_sweep_cell(const ExperimentConfig& cfg, const ClassifierSpec& classifier, std::size_t b,
                        std::uint64_t stream, StageTimer* timer) {
    std::vector<RepOutcome> reps(cfg.n_reps);
    parallel_for(cfg.n_reps, cfg.threads, [&](std::size_t r) {
        Rng rng(derive_seed(stream, r));
        const auto pipe = build_pipeline(cfg, classifier, b, rng, 1, timer);
        reps[r] = score_rep(cfg, pipe.odds, pipe.calibration.surface, rng, timer);
    });
    return summarize(classifier.label(), b, reps);
}

SweepRow run_exact_cell(const ExperimentConfig& cfg, std::uint64_t stream, StageTimer* timer) {
    const auto odds = exact_odds_model(cfg.model, cfg.p);
    Rng surface_rng(derive_seed(stream, cfg.n_reps));
    const auto surface = timed(timer, "exact critical values", [&] {
        return exact_critical_surface(cfg.model, cfg.alpha, cfg.exact_critical_reps, surface_rng, cfg.threads);
    });
    std::vector<RepOutcome> reps(cfg.n_reps);
    parallel_for(cfg.n_reps, cfg.threads, [&](std::size_t r) {
        Rng rng(derive_seed(stream, r));
        reps[r] = score_rep(cfg, odds, surface, rng, timer);
    });
    return summarize("exact", 0, reps);
}

std::vector<SweepRow> run_table_sweep(const ExperimentConfig& cfg, StageTimer* timer) {
    std::vector<SweepRow> rows;
    for (std::size_t c = 0; c < cfg.classifiers.size(); ++c)
        for (std::size_t k = 0; k < cfg.b_list.size(); ++k)
            rows.push_back(run_sweep_cell(cfg, cfg.classifiers[c], cfg.b_list[k],
                                          derive_seed(derive_seed(cfg.seed, c + 1), cfg.b_list[k]), timer));
    if (cfg.include_exact) rows.push_back(run_exact_cell(cfg, derive_seed(cfg.seed, 0), timer));
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    write_csv_row(out, {"classifier", "B", "ce_mean", "ce_sd", "power", "power_sd", "size_pct_mean", "size_pct_sd",
                        "coverage", "reps"});
    for (const auto& r : rows)
        write_csv_row(out, {r.classifier, std::to_string(r.b), format_real(r.ce_mean), format_real(r.ce_sd),
                            format_real(r.power), format_real(r.power_sd), format_real(r.size_mean),
                            format_real(r.size_sd), format_real(r.coverage), std::to_string(r.reps)});
}

std::vector<DiagnosticRun> run_coverage_diagnostic(const ExperimentConfig& cfg, StageTimer* timer) {
    if (cfg.classifiers.empty()) throw ConfigError("no classifier configured for the diagnostic");
    Rng rng(derive_seed(cfg.seed, 0x64696167ULL));
    const auto sample = timed(timer, "labeled sample", [&] {
        return generate_labeled_sample(cfg.model, cfg.diagnostic_b, cfg.p, rng, cfg.threads);
    });
    const auto odds =
        timed(timer, "odds training", [&] { return train_odds(sample, cfg.classifiers.front(), cfg.model, rng); });

    std::vector<DiagnosticRun> runs;
    for (std::size_t k = 0; k < cfg.b_prime_list.size(); ++k) {
        Rng local(derive_seed(rng.seed(), 1000 + k));
        const auto cal = calibrate(odds, cfg.b_prime_list[k], cfg.alpha, cfg.quantile_kind, cfg.boosting, local,
                                   cfg.threads, timer);
        const auto sample_w = timed(timer, "coverage sample", [&] {
            return collect_coverage(odds, cal.surface, cfg.alpha, cfg.b_dd, local, cfg.threads);
        });
        DiagnosticRun run;
        run.b_prime = cfg.b_prime_list[k];
        run.report = timed(timer, "coverage fit",
                           [&] { return fit_coverage_curve(sample_w, cfg.model.params, 1.0 - cfg.alpha); });
        run.raw_mean = sample_w.raw_mean();
        runs.push_back(std::move(run));
    }
    return runs;
}

RegionResult run_2d_region(const ExperimentConfig& cfg, StageTimer* timer) {
    const auto& model = cfg.model;
    if (model.params.dim() != 2) throw ConfigError("region-2d needs a two-parameter model");
    if (cfg.classifiers.empty()) throw ConfigError("no classifier configured for region-2d");

    RegionResult result;
    Rng data_rng(derive_seed(cfg.seed, 0x6f6273ULL));
    result.observed = simulate(model, model.true_theta, model.n_obs, data_rng);

    double cell = 1.0;
    for (std::size_t d = 0; d < model.params.dim(); ++d) cell *= model.params.step(d);

    const auto exact = exact_odds_model(model, cfg.p);
    Rng exact_rng(derive_seed(cfg.seed, 0x657861ULL));
    const auto surface = timed(timer, "exact critical values", [&] {
        return exact_critical_surface(model, cfg.alpha, cfg.region_exact_reps, exact_rng, cfg.threads);
    });
    RegionRun exact_run;
    exact_run.label = "exact";
    exact_run.set = confidence_set(exact, surface, result.observed, cfg.alpha);
    exact_run.area = static_cast<double>(exact_run.set.accepted.size()) * cell;
    result.runs.push_back(exact_run);

    Rng validity_rng(derive_seed(cfg.seed, 0x76616cULL));
    result.exact_coverage =
        evaluate_at_truth(exact, surface, model.true_theta, cfg.alpha, cfg.n_reps, validity_rng, cfg.threads).coverage;

    const auto& classifier = cfg.classifiers.front();
    for (std::size_t k = 0; k < cfg.region_b_list.size(); ++k) {
        Rng rng(derive_seed(derive_seed(cfg.seed, 0x726567ULL), k));
        const auto pipe = build_pipeline(cfg, classifier, cfg.region_b_list[k], rng, cfg.threads, timer);
        RegionRun run;
        run.label = classifier.label();
        run.b = cfg.region_b_list[k];
        run.set = timed(timer, "inversion",
                        [&] { return confidence_set(pipe.odds, pipe.calibration.surface, result.observed, cfg.alpha); });
        run.area = static_cast<double>(run.set.accepted.size()) * cell;
        std::size_t differ = 0;
        for (std::size_t j = 0; j < model.params.grid_size(); ++j)
            differ += run.set.accept_flag[j] != exact_run.set.accept_flag[j];
        run.symmetric_difference = static_cast<double>(differ) * cell;
        result.runs.push_back(std::move(run));
    }
    return result;
}

void write_region_csv(std::ostream& out, const ParamSpace& space, const RegionResult& result) {
    std::vector<std::string> header{"theta0", "theta1"};
    for (const auto& run : result.runs)
        header.push_back(run.b == 0 ? run.label : run.label + "_B" + std::to_string(run.b));
    write_csv_row(out, header);
    for (std::size_t j = 0; j < space.grid_size(); ++j) {
        const auto& t = space.grid_point(j);
        std::vector<std::string> row{format_real(t[0]), format_real(t[1])};
        for (const auto& run : result.runs) row.push_back(run.set.accept_flag[j] ? "1" : "0");
        write_csv_row(out, row);
    }
}

void write_region_summary_csv(std::ostream& out, const RegionResult& result) {
    write_csv_row(out, {"method", "B", "accepted_points", "area", "symmetric_difference_area", "exact_coverage"});
    for (const auto& run : result.runs)
        write_csv_row(out, {run.label, std::to_string(run.b), std::to_string(run.set.accepted.size()),
                            format_real(run.area), format_real(run.symmetric_difference),
                            run.b == 0 ? format_real(result.exact_coverage) : ""});
}

void write_manifest(std::ostream& out, const ExperimentConfig& cfg, const std::string& command) {
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg.config_text)));
    out << "acore " << version() << '\n';
    out << "command " << command << '\n';
    out << "config_fnv1a64 " << hash << '\n';
    out << "seed " << cfg.seed << '\n';
    out << "model " << cfg.model.name() << '\n';
    out << "compiler " << __VERSION__ << '\n';
}

} // namespace acore
