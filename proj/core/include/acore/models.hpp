#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acore/param_space.hpp"
#include "acore/rng.hpp"
#include "acore/small_vec.hpp"

namespace acore {

class KeyValueConfig;

enum class ModelKind { poisson_counting, gmm, signal_background, gaussian_mean };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view name);

struct NormalComponent {
    double mean = 0.0;
    double sd = 1.0;
};

/// Forward simulator F_theta, reference distribution G, proposal r_Theta and
/// observed-sample size n for one model of the zoo. Immutable once built; all
/// randomness comes from the Rng passed to each call.
///
///   poisson_counting   X ~ Poisson(background + theta),     G = N(110, 15^2)
///   gmm                X ~ 1/2 N(-theta,1) + 1/2 N(theta,1), G = N(0, 5^2)
///   signal_background  X = (N, M), N ~ Poisson(b + nu), M ~ Poisson(b),
///                      theta = (nu, b), G = independent normals matching
///                      the prior-predictive mean and sd of N and M
///   gaussian_mean      X ~ N(theta, 1)
///
/// Proposals are uniform over the parameter bounds. Counts are stored as reals.
struct ModelSpec {
    ModelKind kind = ModelKind::gaussian_mean;
    ParamSpace params;
    std::size_t data_dim = 1;
    Box proposal;
    std::vector<NormalComponent> reference;
    std::size_t n_obs = 10;
    double background = 100.0;
    ParamPoint true_theta;

    std::string name() const { return std::string(to_string(kind)); }
};

/// Model with the default set-up for `kind`.
ModelSpec make_model(ModelKind kind, std::size_t grid_points_per_dim = 0);

/// Prior-predictive normal reference for signal_background given its bounds.
std::vector<NormalComponent> signal_background_reference(const std::vector<Interval>& bounds);

struct ModelConfig {
    ModelSpec model;
    std::uint64_t seed = 0;
};

/// Reads the `[model]` section: name, lower, upper, grid_points, n_obs, seed,
/// and optionally true_theta, background, reference_mean, reference_sd.
ModelConfig load_model_config(const KeyValueConfig& cfg);

/// Configuration keys understood by load_model_config.
std::vector<std::string> model_config_keys();

Observation simulate_one(const ModelSpec& model, const ParamPoint& theta, Rng& rng);
Dataset simulate(const ModelSpec& model, const ParamPoint& theta, std::size_t n, Rng& rng);

/// One draw from G; independent of theta.
Observation reference_draw(const ModelSpec& model, Rng& rng);

/// Uniform draw over `region` (all proposals in the zoo are uniform).
ParamPoint prior_draw(const ModelSpec& model, const Box& region, Rng& rng);
ParamPoint prior_draw(const ModelSpec& model, Rng& rng);

/// log f_theta(x). Count models use the log-gamma continuation of the Poisson
/// pmf for non-integer x >= 0 and return -inf for x < 0.
double exact_logpdf(const ModelSpec& model, const ParamPoint& theta, const Observation& x);

/// log g(x).
double reference_logpdf(const ModelSpec& model, const Observation& x);

/// Sum of log f_theta over the data.
double exact_loglik(const ModelSpec& model, const ParamPoint& theta, const Dataset& data);

/// exact_loglik at every theta in `thetas`, using sufficient statistics where
/// the model has them.
void exact_loglik_many(const ModelSpec& model, std::span<const ParamPoint> thetas,
                       const Dataset& data, std::span<double> out);

/// Analytic mean and variance of one draw from F_theta, per data component.
struct Moments {
    std::vector<double> mean;
    std::vector<double> variance;
};
Moments analytic_moments(const ModelSpec& model, const ParamPoint& theta);

} // namespace acore
