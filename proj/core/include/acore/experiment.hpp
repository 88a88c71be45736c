#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <mutex>
#include <string>
#include <vector>

#include "acore/config.hpp"
#include "acore/diagnostics.hpp"
#include "acore/quantile.hpp"

namespace acore {

const char* version() noexcept;

/// Accumulates wall time per named stage; safe to share across workers.
class StageTimer {
public:
    void add(const std::string& stage, double seconds);

    template <class Fn>
    decltype(auto) time(const std::string& stage, Fn&& fn) {
        const auto start = std::chrono::steady_clock::now();
        struct Done {
            StageTimer* self;
            const std::string& stage;
            std::chrono::steady_clock::time_point start;
            ~Done() {
                self->add(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
            }
        } done{this, stage, start};
        return fn();
    }

    struct Stage {
        std::string name;
        double seconds = 0.0;
        std::size_t calls = 0;
    };
    std::vector<Stage> stages() const;
    double total() const;
    void report(std::ostream& out) const;

private:
    mutable std::mutex mutex_;
    std::vector<Stage> stages_;
};

/// Everything a run needs. Defaults: B' = 5000, B'' = 250, alpha = 0.1,
/// 100 repetitions, a 5000-example cross-entropy holdout and 10^4 datasets
/// per grid point for MC-exact critical values.
struct ExperimentConfig {
    ModelSpec model;
    std::uint64_t seed = 0;
    std::vector<ClassifierSpec> classifiers;
    std::vector<std::size_t> b_list{1000};
    double p = 0.5;
    std::size_t b_prime = 5000;
    std::size_t b_dd = 250;
    double alpha = 0.1;
    std::size_t n_reps = 100;
    std::size_t holdout = 5000;
    std::size_t exact_critical_reps = 10000;
    bool include_exact = true;
    QuantileKind quantile_kind = QuantileKind::boosted_trees;
    BoostingSpec boosting;
    std::vector<std::size_t> b_prime_list{100, 500, 1000};
    std::size_t diagnostic_b = 1000;
    std::vector<std::size_t> region_b_list{1000, 10000};
    std::size_t region_exact_reps = 2000;
    std::filesystem::path out_dir = "out";
    std::size_t threads = 1;
    std::string config_text;
};

/// Reads `[model]`, `[experiment]`, `[mlp]`, `[qda]`, `[knn]`, `[logistic]`,
/// `[quantile]` and `[region]`. Unknown keys and invalid values throw
/// ConfigError with the line number.
ExperimentConfig load_experiment_config(const KeyValueConfig& cfg);

/// Fitted critical-value machinery for one odds model.
struct Calibration {
    QuantileModel quantile;
    std::vector<double> surface;
};

/// Pointwise τ set of size B', quantile fit and grid surface.
Calibration calibrate(const OddsModel& odds, std::size_t b_prime, double alpha, QuantileKind kind,
                      const BoostingSpec& boosting, Rng& rng, std::size_t threads = 1, StageTimer* timer = nullptr);

struct Pipeline {
    OddsModel odds;
    Calibration calibration;
};

/// Labeled sample of size B, classifier fit, then calibrate().
Pipeline build_pipeline(const ExperimentConfig& cfg, const ClassifierSpec& classifier, std::size_t b, Rng& rng,
                        std::size_t threads = 1, StageTimer* timer = nullptr);

struct SweepRow {
    std::string classifier;
    std::size_t b = 0; ///< 0 for the exact row
    double ce_mean = 0.0;
    double ce_sd = 0.0;
    double power = 0.0;
    double power_sd = 0.0;
    double size_mean = 0.0; ///< percent
    double size_sd = 0.0;
    double coverage = 0.0;
    std::size_t reps = 0;
};

/// One row per (classifier, B) plus the exact-oracle row. Every repetition
/// retrains the classifier and the quantile regressor on its own stream and
/// builds one confidence set from data at the true θ.
std::vector<SweepRow> run_table_sweep(const ExperimentConfig& cfg, StageTimer* timer = nullptr);

/// Repetitions for one (classifier, B) cell.
SweepRow run_sweep_cell(const ExperimentConfig& cfg, const ClassifierSpec& classifier, std::size_t b,
                        std::uint64_t stream, StageTimer* timer = nullptr);

/// Exact-oracle row with MC-exact critical values.
SweepRow run_exact_cell(const ExperimentConfig& cfg, std::uint64_t stream, StageTimer* timer = nullptr);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

struct DiagnosticRun {
    std::size_t b_prime = 0;
    CoverageReport report;
    double raw_mean = 0.0;
};

/// Trains the first configured classifier at diagnostic_b once, then for each
/// B' in the list fits critical values and runs the coverage diagnostic.
std::vector<DiagnosticRun> run_coverage_diagnostic(const ExperimentConfig& cfg, StageTimer* timer = nullptr);

struct RegionRun {
    std::string label;
    std::size_t b = 0;
    ConfidenceSet set;
    double area = 0.0;
    double symmetric_difference = 0.0; ///< area outside the overlap with the exact region
};

struct RegionResult {
    Dataset observed;
    std::vector<RegionRun> runs; ///< exact first, then one per B
    double exact_coverage = 0.0; ///< over n_reps datasets at the true θ
};

/// Two-parameter confidence regions for one observed dataset at the true θ:
/// exact oracle with MC-exact critical values, then the first configured
/// classifier at each B in region_b_list.
RegionResult run_2d_region(const ExperimentConfig& cfg, StageTimer* timer = nullptr);

void write_region_csv(std::ostream& out, const ParamSpace& space, const RegionResult& result);
void write_region_summary_csv(std::ostream& out, const RegionResult& result);

/// Manifest text: version, command, config hash and seed. No timestamps.
void write_manifest(std::ostream& out, const ExperimentConfig& cfg, const std::string& command);

} // namespace acore
