#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "acore/odds.hpp"

namespace acore {

/// Reject H0 iff tau < critical; tau == critical accepts.
inline bool test_decision(double tau, double critical) noexcept { return tau < critical; }

/// Neyman-inverted confidence set over the model grid.
struct ConfidenceSet {
    std::vector<std::size_t> accepted; ///< ascending grid indices
    double alpha = 0.1;
    double size_fraction = 0.0;
    std::vector<double> tau;     ///< τ(D; {θ_j}) by grid index
    std::vector<double> cutoffs; ///< Ĉ_θj by grid index
    std::vector<char> accept_flag;

    bool contains(std::size_t grid_index) const { return accept_flag.at(grid_index) != 0; }
};

/// Accepts grid point j iff τ(D; {θ_j}) >= surface[j].
ConfidenceSet confidence_set(const OddsModel& odds, std::span<const double> surface, const Dataset& data,
                             double alpha);

/// Same, from a precomputed grid profile of summed log-odds.
ConfidenceSet confidence_set_from_profile(std::span<const double> profile, std::span<const double> surface,
                                          double alpha);

/// Summary of `reps` confidence sets built from data drawn at one true θ*,
/// snapped to the nearest grid point. Power is the rejection rate over the
/// other grid points; size is in percent of the grid.
struct TruthEvaluation {
    std::size_t reps = 0;
    std::size_t true_index = 0;
    double power = 0.0;
    double size_mean = 0.0; ///< percent
    double size_sd = 0.0;   ///< percent
    double coverage = 0.0;
};

TruthEvaluation evaluate_at_truth(const OddsModel& odds, std::span<const double> surface,
                                  const ParamPoint& true_theta, double alpha, std::size_t reps, Rng& rng,
                                  std::size_t threads = 1);

/// Power of one confidence set against the grid point `true_index`.
double set_power(const ConfidenceSet& set, std::size_t true_index);

double average_power(const OddsModel& odds, std::span<const double> surface, const ParamPoint& true_theta,
                     std::size_t reps, Rng& rng, std::size_t threads = 1);

} // namespace acore
