#pragma once

#include <cstddef>
#include <vector>

#include "acore/models.hpp"

namespace acore {

struct LabeledExample {
    ParamPoint theta;
    Observation x;
    int y = 0; ///< 1 if x came from F_theta, 0 if from the reference G.
};

struct LabeledSet {
    std::vector<LabeledExample> examples;
    double bernoulli_p = 0.5;

    std::size_t size() const noexcept { return examples.size(); }
    bool empty() const noexcept { return examples.empty(); }
    std::size_t count_positive() const noexcept;
};

/// Labeled training sample: theta_i ~ r_Theta, Y_i ~ Ber(p) independent of
/// theta_i, X_i ~ F_theta_i when Y_i = 1 and X_i ~ G otherwise. One x per theta.
///
/// Example i draws from its own stream derived from one value of `rng`, so the
/// output is identical for any `threads`. `p` may be 1 (all simulator draws).
LabeledSet generate_labeled_sample(const ModelSpec& model, std::size_t count, double p, Rng& rng,
                                   std::size_t threads = 1);

} // namespace acore
