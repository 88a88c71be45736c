#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "acore/odds.hpp"

namespace acore {

/// Lower empirical alpha-quantile: the ceil(alpha * m)-th order statistic
/// (the smallest value when alpha * m < 1).
double empirical_quantile(std::vector<double> values, double alpha);

/// Mean pinball loss of `pred` for targets `y` at level alpha.
double pinball_loss(std::span<const double> y, std::span<const double> pred, double alpha);

struct TauPair {
    ParamPoint theta;
    double tau = 0.0;
};

struct TauTrainingSet {
    std::vector<TauPair> pairs;

    std::size_t size() const noexcept { return pairs.size(); }
};

enum class NullMode { composite, pointwise };

/// Simulates B' pairs (θ_i, τ_i). Composite mode draws θ_i uniformly over
/// `theta0_region` and scores every dataset against the grid points of that
/// region. Pointwise mode draws θ_i over the whole proposal and scores the
/// simple null {θ_i} (see tau_simple). Pair i uses its own stream.
TauTrainingSet simulate_tau_set(const OddsModel& odds, std::size_t b_prime, NullMode mode, Rng& rng,
                                std::size_t threads = 1, const Box* theta0_region = nullptr);

enum class QuantileKind { boosted_trees, knn_quantile };

std::string_view to_string(QuantileKind kind) noexcept;
QuantileKind parse_quantile_kind(std::string_view name);

/// Gradient-boosted quantile trees: each stage fits a least-squares
/// regression tree to the pinball-loss negative gradient, then resets every
/// leaf to the alpha-quantile of the residuals it holds.
struct BoostingSpec {
    std::size_t trees = 100;
    std::size_t max_depth = 3;
    double learning_rate = 0.1;
    std::size_t min_leaf = 1;
    std::size_t neighbours = 0; ///< knn_quantile only; 0 selects round(sqrt(B')).
};

struct TreeNode {
    int feature = -1; ///< -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
};

/// Fitted conditional quantile θ -> ĉ_α(θ). Immutable; safe to share.
class QuantileModel {
public:
    QuantileKind kind() const noexcept { return kind_; }
    double alpha() const noexcept { return alpha_; }

    double predict(const ParamPoint& theta) const;

    void save(std::ostream& out) const;
    static QuantileModel load(std::istream& in);

private:
    friend QuantileModel fit_quantile(const TauTrainingSet&, double, QuantileKind, const BoostingSpec&);

    QuantileKind kind_ = QuantileKind::boosted_trees;
    double alpha_ = 0.1;

    double init_ = 0.0;
    double learning_rate_ = 0.1;
    std::vector<std::vector<TreeNode>> trees_;

    std::size_t neighbours_ = 0;
    std::vector<ParamPoint> thetas_;
    std::vector<double> taus_;
    std::vector<double> axis_scale_;
};

/// Throws DomainError unless 0 < alpha < 1 and the set has at least 50 pairs.
QuantileModel fit_quantile(const TauTrainingSet& train, double alpha, QuantileKind kind = QuantileKind::boosted_trees,
                           const BoostingSpec& spec = {});

/// Ĉ = min over the region of ĉ_α.
double critical_value_composite(const QuantileModel& qm, const ParamSpace& space, const GridSubset& theta0_region);

/// ĉ_α at every grid point, by grid index.
std::vector<double> critical_surface(const QuantileModel& qm, const ParamSpace& space);

} // namespace acore
