#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "acore/classifiers.hpp"
#include "acore/labeled_sample.hpp"
#include "acore/models.hpp"

namespace acore {

/// Anything that yields log P(Y=1|theta,x)/P(Y=0|theta,x).
class OddsSource {
public:
    virtual ~OddsSource() = default;

    virtual std::string label() const = 0;

    /// Whether OddsModel should clamp this source's log-odds to the clip range.
    virtual bool clipped() const noexcept { return true; }

    virtual double log_odds(const ParamPoint& theta, const Observation& x) const = 0;

    /// out[j * xs.size() + i] = log_odds(thetas[j], xs[i]).
    virtual void log_odds_grid(std::span<const ParamPoint> thetas, std::span<const Observation> xs,
                               std::span<double> out) const;

    /// out[j] = sum_i log_odds(thetas[j], data[i]), before clipping. Only
    /// called for unclipped sources; the default sums log_odds_grid.
    virtual void sum_log_odds(std::span<const ParamPoint> thetas, const Dataset& data,
                              std::span<double> out) const;

    virtual void save(std::ostream& out) const = 0;
};

/// Odds estimated by a trained classifier.
class ClassifierOdds final : public OddsSource {
public:
    explicit ClassifierOdds(std::unique_ptr<Classifier> classifier) : classifier_(std::move(classifier)) {}

    std::string label() const override { return std::string(to_string(classifier_->kind())); }
    double log_odds(const ParamPoint& theta, const Observation& x) const override {
        return classifier_->logit(theta, x);
    }
    void log_odds_grid(std::span<const ParamPoint> thetas, std::span<const Observation> xs,
                       std::span<double> out) const override {
        classifier_->logit_grid(thetas, xs, out);
    }
    void save(std::ostream& out) const override;

    const Classifier& classifier() const noexcept { return *classifier_; }

private:
    std::unique_ptr<Classifier> classifier_;
};

/// Predicts the same probability everywhere; a classifier that learned nothing.
class ConstantOdds final : public OddsSource {
public:
    explicit ConstantOdds(double probability = 0.5);

    std::string label() const override { return "constant"; }
    double log_odds(const ParamPoint&, const Observation&) const override { return log_odds_; }
    void save(std::ostream& out) const override;

    double probability() const noexcept { return probability_; }

private:
    double probability_;
    double log_odds_;
};

/// Classifier-backed odds with clipping, bound to the model it was trained on.
/// Immutable after construction and safe to evaluate concurrently.
class OddsModel {
public:
    static constexpr double kDefaultClipEps = 1e-12;

    OddsModel(std::shared_ptr<const OddsSource> source, ModelSpec model, double clip_eps = kDefaultClipEps);

    const ModelSpec& model() const noexcept { return model_; }
    const OddsSource& source() const noexcept { return *source_; }
    double clip_eps() const noexcept { return clip_eps_; }
    std::string label() const { return source_->label(); }

    /// Clipped P(Y=1 | theta, x), in [clip_eps, 1 - clip_eps].
    double probability(const ParamPoint& theta, const Observation& x) const;

    /// log Ô(x; theta). Classifier sources are clamped to
    /// +-log((1 - clip_eps) / clip_eps); the exact oracle is not.
    double log_odds(const ParamPoint& theta, const Observation& x) const;

    /// L[j] = sum_i log Ô(x_i; thetas[j]).
    void sum_log_odds(std::span<const ParamPoint> thetas, const Dataset& data, std::span<double> out) const;

    /// L over the full parameter grid.
    std::vector<double> grid_profile(const Dataset& data) const;

    void save(std::ostream& out) const;

private:
    double clamp(double log_odds) const noexcept;

    std::shared_ptr<const OddsSource> source_;
    ModelSpec model_;
    double clip_eps_;
    double max_log_odds_;
};

/// Fits a classifier on `sample` and wraps it as an OddsModel for `model`.
OddsModel train_odds(const LabeledSet& sample, const ClassifierSpec& spec, const ModelSpec& model, Rng& rng);

/// Reads an OddsModel written by OddsModel::save. `model` supplies the
/// simulator the odds refer to.
OddsModel load_odds(std::istream& in, const ModelSpec& model);

double odds(const OddsModel& m, const ParamPoint& theta, const Observation& x);
double odds_ratio(const OddsModel& m, const Observation& x, const ParamPoint& theta0, const ParamPoint& theta1);
double log_odds_ratio(const OddsModel& m, const Observation& x, const ParamPoint& theta0,
                      const ParamPoint& theta1);

struct TauResult {
    double tau = 0.0;
    std::size_t argmax_theta0 = 0; ///< grid index
    std::size_t argmin_theta1 = 0; ///< grid index
};

/// τ(D; Θ0) = sup over Θ0, inf over the grid, of sum_i log ÔR(x_i; θ0, θ1).
/// Since the sum telescopes to L(θ0) - L(θ1), this is max over Θ0 of L minus
/// max over the grid of L. Ties go to the lowest grid index.
TauResult acore_statistic(const OddsModel& m, const Dataset& data, const GridSubset& theta0_region);

/// Same, from a precomputed grid profile.
TauResult tau_from_profile(std::span<const double> profile, const GridSubset& theta0_region);

/// τ for the simple null {theta}, which need not lie on the grid: θ itself
/// joins the grid for the inf, so the result is never positive.
double tau_simple(const OddsModel& m, const Dataset& data, const ParamPoint& theta);

/// Per-example binary cross-entropy of the predictions on `holdout`.
std::vector<double> cross_entropy_terms(const OddsModel& m, const LabeledSet& holdout);

/// Mean of cross_entropy_terms.
double cross_entropy(const OddsModel& m, const LabeledSet& holdout);

} // namespace acore
