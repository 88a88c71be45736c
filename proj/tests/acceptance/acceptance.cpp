// Acceptance checks, one per criterion. Prints one PASS/FAIL line each and
// exits non-zero if any selected criterion fails.
//
//   acore_acceptance [--criterion N] [--threads N]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "acore/experiment.hpp"
#include "acore/io.hpp"
#include "acore/oracle.hpp"

using namespace acore;

namespace {

std::size_t g_threads = 1;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

ExperimentConfig config_for(ModelKind kind, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.model = make_model(kind);
    cfg.seed = seed;
    cfg.threads = g_threads;
    return cfg;
}

ClassifierSpec classifier(ClassifierKind kind) {
    ClassifierSpec s;
    s.kind = kind;
    return s;
}

std::string row_text(const SweepRow& r) {
    return fmt("power %.3f, size %.1f%% (sd %.1f), coverage %.2f, CE %.3f", r.power, r.size_mean, r.size_sd,
               r.coverage, r.ce_mean);
}

Outcome exact_row(ModelKind kind, double pw_lo, double pw_hi, double sz_lo, double sz_hi) {
    auto cfg = config_for(kind, 20200712);
    const auto row = run_exact_cell(cfg, derive_seed(cfg.seed, 0));
    const bool ok = within(row.power, pw_lo, pw_hi) && within(row.size_mean, sz_lo, sz_hi) &&
                    within(row.coverage, 0.84, 0.95);
    return {ok, row_text(row)};
}

Outcome criterion1() { return exact_row(ModelKind::poisson_counting, 0.49, 0.59, 40.0, 50.0); }

Outcome criterion2() { return exact_row(ModelKind::gmm, 0.87, 0.97, 7.0, 13.0); }

Outcome criterion3() {
    auto cfg = config_for(ModelKind::poisson_counting, 31);
    const auto spec = classifier(ClassifierKind::qda);
    std::vector<SweepRow> rows;
    for (std::size_t b : {100, 500, 1000}) rows.push_back(run_sweep_cell(cfg, spec, b, derive_seed(cfg.seed, b)));
    const auto& top = rows.back();
    bool ok = within(top.ce_mean, 0.62, 0.67) && within(top.power, 0.43, 0.57) && within(top.size_mean, 43.0, 60.0);
    std::string trend;
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        const double n = static_cast<double>(rows[k].reps);
        const double se = std::sqrt((rows[k].power_sd * rows[k].power_sd + rows[k + 1].power_sd * rows[k + 1].power_sd) / n);
        const bool step = rows[k + 1].power >= rows[k].power - se;
        ok = ok && step;
        trend += fmt(" B=%zu:%.3f", rows[k].b, rows[k].power);
    }
    trend += fmt(" B=%zu:%.3f", top.b, top.power);
    return {ok, "B=1000 " + row_text(top) + "; power by B" + trend};
}

Outcome criterion4() {
    auto cfg = config_for(ModelKind::gmm, 41);
    const auto row = run_sweep_cell(cfg, classifier(ClassifierKind::mlp), 1000, derive_seed(cfg.seed, 1000));
    const bool ok = within(row.ce_mean, 0.33, 0.40) && row.power >= 0.82 && row.size_mean <= 18.0;
    return {ok, row_text(row)};
}

Outcome criterion5() {
    auto cfg = config_for(ModelKind::gmm, 51);
    const auto row = run_sweep_cell(cfg, classifier(ClassifierKind::qda), 1000, derive_seed(cfg.seed, 1000));
    return {row.power <= 0.25 && row.size_mean >= 75.0, row_text(row)};
}

Outcome criterion6() {
    double worst = 0.0;
    std::size_t checked = 0;
    for (auto kind : {ModelKind::poisson_counting, ModelKind::gmm, ModelKind::signal_background,
                      ModelKind::gaussian_mean}) {
        const auto model = make_model(kind);
        const auto odds = exact_odds_model(model);
        Rng rng(derive_seed(61, static_cast<std::uint64_t>(kind)));
        for (int rep = 0; rep < 100; ++rep) {
            const auto theta = prior_draw(model, rng);
            const auto data = simulate(model, theta, model.n_obs, rng);
            // Alternate simple nulls and random grid-aligned boxes as Θ0.
            GridSubset region;
            if (rep % 2 == 0) {
                region = {model.params.nearest_index(prior_draw(model, rng))};
            } else {
                Box box = model.proposal;
                for (std::size_t d = 0; d < box.dim(); ++d) {
                    const auto axis = model.params.axis(d);
                    const auto a = rng.index(axis.size()), b = rng.index(axis.size());
                    const double pad = 1e-9 * model.params.step(d);
                    box.bounds[d] = {axis[std::min(a, b)] - pad, axis[std::max(a, b)] + pad};
                }
                region = model.params.subset(box);
            }
            const double tau = acore_statistic(odds, data, region).tau;
            const double lr = exact_lr_statistic(model, data, region);
            worst = std::max(worst, std::abs(tau - lr));
            ++checked;
        }
    }
    return {worst <= 1e-10, fmt("max |tau - Lambda| = %.3g over %zu datasets", worst, checked)};
}

Outcome criterion7() {
    int good = 0;
    std::string runs;
    for (std::uint64_t s = 0; s < 10; ++s) {
        auto cfg = config_for(ModelKind::poisson_counting, 7000 + s);
        cfg.classifiers = {classifier(ClassifierKind::qda)};
        cfg.diagnostic_b = 1000;
        cfg.b_prime_list = {100, 500, 1000};
        const auto diag = run_coverage_diagnostic(cfg);
        const bool ok = !diag[0].report.passed && diag[1].report.passed && diag[2].report.passed;
        good += ok;
        runs += fmt(" %c%c%c", diag[0].report.passed ? 'P' : 'F', diag[1].report.passed ? 'P' : 'F',
                    diag[2].report.passed ? 'P' : 'F');
    }
    return {good >= 6, fmt("%d of 10 runs fail at B'=100 and pass at 500 and 1000;", good) + runs};
}

Outcome criterion8() {
    const ParamSpace space({{0.0, 1.0}}, 100);
    Rng rng(81);
    TauTrainingSet set;
    for (int i = 0; i < 5000; ++i) set.pairs.push_back({ParamPoint{rng.uniform(0.0, 1.0)}, rng.uniform(0.0, 1.0)});
    const auto qm = fit_quantile(set, 0.1);
    const auto surface = critical_surface(qm, space);
    double lo = surface[0], hi = surface[0];
    for (double v : surface) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo >= 0.07 && hi <= 0.13, fmt("surface range [%.4f, %.4f]", lo, hi)};
}

Outcome criterion9() {
    auto cfg = config_for(ModelKind::poisson_counting, 91);
    const OddsModel odds(std::make_shared<ConstantOdds>(0.5), cfg.model);
    Rng rng(cfg.seed);
    const auto cal = calibrate(odds, 5000, cfg.alpha, cfg.quantile_kind, cfg.boosting, rng, g_threads);
    const auto ev = evaluate_at_truth(odds, cal.surface, cfg.model.true_theta, cfg.alpha, 100, rng, g_threads);
    return {within(ev.coverage, 0.84, 0.95),
            fmt("coverage %.2f, size %.1f%%, power %.3f", ev.coverage, ev.size_mean, ev.power)};
}

Outcome criterion10() {
    auto cfg = config_for(ModelKind::poisson_counting, 101);
    cfg.threads = 1;
    StageTimer timer;
    const auto start = std::chrono::steady_clock::now();
    Rng rng(cfg.seed);
    const auto pipe = build_pipeline(cfg, classifier(ClassifierKind::qda), 1000, rng, 1, &timer);
    const auto data = simulate(cfg.model, cfg.model.true_theta, cfg.model.n_obs, rng);
    const auto set = timer.time("inversion", [&] { return confidence_set(pipe.odds, pipe.calibration.surface, data, cfg.alpha); });
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string stages;
    for (const auto& s : timer.stages()) stages += fmt(" %s=%.3fs", s.name.c_str(), s.seconds);
    return {secs < 30.0 && set.tau.size() == 100,
            fmt("%.2f s for one confidence set (%zu points accepted);", secs, set.accepted.size()) + stages};
}

const std::vector<std::pair<const char*, std::function<Outcome()>>> kCriteria = {
    {"exact-oracle Poisson row", criterion1},
    {"exact-oracle GMM row", criterion2},
    {"QDA on Poisson sweep", criterion3},
    {"MLP on GMM sweep", criterion4},
    {"QDA on GMM failure mode", criterion5},
    {"Fisher consistency", criterion6},
    {"critical-value convergence diagnostic", criterion7},
    {"quantile regression calibration", criterion8},
    {"validity with a constant classifier", criterion9},
    {"single-core runtime", criterion10},
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    g_threads = std::max(1u, std::thread::hardware_concurrency());
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
        else if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) g_threads = std::max(1, std::atoi(argv[++i]));
        else {
            std::fprintf(stderr, "usage: %s [--criterion N] [--threads N]\n", argv[0]);
            return 2;
        }
    }
    if (only < 0 || only > static_cast<int>(kCriteria.size())) {
        std::fprintf(stderr, "criterion must be in 1..%zu\n", kCriteria.size());
        return 2;
    }

    int failures = 0;
    for (std::size_t k = 0; k < kCriteria.size(); ++k) {
        if (only != 0 && static_cast<int>(k + 1) != only) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = kCriteria[k].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %zu %s: %s (%s) [%.1f s]\n", k + 1, out.pass ? "PASS" : "FAIL", kCriteria[k].first,
                    out.detail.c_str(), secs);
        std::fflush(stdout);
        failures += !out.pass;
    }
    return failures == 0 ? 0 : 1;
}
