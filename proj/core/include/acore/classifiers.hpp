#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acore/labeled_sample.hpp"
#include "acore/rng.hpp"

namespace acore {

enum class ClassifierKind { logistic, qda, knn, mlp };

std::string_view to_string(ClassifierKind kind) noexcept;
ClassifierKind parse_classifier_kind(std::string_view name);

/// Probabilistic classifier configuration. Defaults:
///   mlp      one hidden layer of 100 ReLU units, no weight penalty, Adam with
///            step 1e-3, minibatch 200, at most 200 epochs, early stopping on a
///            10% validation split (patience 10, tolerance 1e-4)
///   qda      full per-class covariance, class priors from label frequencies,
///            diagonal loading of 1e-6 * trace / dim
///   knn      k = round(sqrt(B)); probability = neighbour label fraction
///   logistic Newton / IRLS until the gradient max-norm is below 1e-8
struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::qda;

    std::size_t hidden_units = 100;
    double learning_rate = 1e-3;
    std::size_t max_epochs = 200;
    std::size_t batch_size = 200;
    double validation_fraction = 0.1;
    std::size_t patience = 10;
    double tolerance = 1e-4;
    double weight_penalty = 0.0;

    double covariance_loading = 1e-6;

    std::size_t neighbours = 0; ///< 0 selects round(sqrt(B)).

    double gradient_tolerance = 1e-8;
    std::size_t max_iterations = 100;

    void validate() const;
    std::string label() const { return std::string(to_string(kind)); }
};

/// Per-feature affine standardization fitted on training rows.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    void fit(std::span<const double> rows, std::size_t dim);
    double apply(std::size_t d, double v) const noexcept { return (v - mean[d]) / scale[d]; }
};

/// Trained predictor of P(Y = 1 | theta, x) on the concatenated feature
/// vector [theta; x]. Implementations report the raw logit, which may be
/// infinite (e.g. a kNN neighbourhood with a single label); clipping is the
/// caller's job.
class Classifier {
public:
    virtual ~Classifier() = default;

    virtual ClassifierKind kind() const noexcept = 0;
    virtual std::size_t param_dim() const noexcept = 0;
    virtual std::size_t data_dim() const noexcept = 0;

    virtual double logit(const ParamPoint& theta, const Observation& x) const = 0;

    /// out[j * xs.size() + i] = logit(thetas[j], xs[i]).
    virtual void logit_grid(std::span<const ParamPoint> thetas, std::span<const Observation> xs,
                            std::span<double> out) const;

    /// Text serialization; floating-point values are written as hex floats so
    /// a reloaded model predicts bit-for-bit identically.
    virtual void save(std::ostream& out) const = 0;
};

/// Fits the classifier described by `spec`. Throws TrainingError when the
/// sample does not contain both labels.
std::unique_ptr<Classifier> fit_classifier(const ClassifierSpec& spec, const LabeledSet& sample,
                                           Rng& rng);

/// Reads a classifier written by Classifier::save.
std::unique_ptr<Classifier> load_classifier(std::istream& in);

} // namespace acore
