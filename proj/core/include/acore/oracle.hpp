#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "acore/odds.hpp"

namespace acore {

/// Exact odds p f_theta(x) / ((1 - p) g(x)) from the closed-form model
/// densities. Log-odds are reported unclipped so the Fisher-consistency
/// identity holds to rounding.
class ExactOddsOracle final : public OddsSource {
public:
    ExactOddsOracle(ModelSpec model, double p = 0.5);

    std::string label() const override { return "exact"; }
    bool clipped() const noexcept override { return false; }
    double log_odds(const ParamPoint& theta, const Observation& x) const override;
    void sum_log_odds(std::span<const ParamPoint> thetas, const Dataset& data,
                      std::span<double> out) const override;
    void save(std::ostream& out) const override;

    double p() const noexcept { return p_; }

private:
    ModelSpec model_;
    double p_;
    double prior_log_odds_;
};

/// OddsModel backed by the exact oracle.
OddsModel exact_odds_model(const ModelSpec& model, double p = 0.5);

/// Λ(D; Θ0) = max over Θ0 of log L - max over the grid of log L.
double exact_lr_statistic(const ModelSpec& model, const Dataset& data, const GridSubset& theta0_region);

using DatasetStatistic = std::function<double(const Dataset&)>;

/// Lower empirical alpha-quantile of `statistic` over `reps` datasets drawn at theta0.
double mc_exact_critical(const ModelSpec& model, const DatasetStatistic& statistic, const ParamPoint& theta0,
                         double alpha, std::size_t reps, Rng& rng);

/// MC-exact critical value of Λ(D; {θ}) for every grid point, `reps`
/// datasets each. Grid point j uses its own stream, so `threads` does not
/// change the result.
std::vector<double> exact_critical_surface(const ModelSpec& model, double alpha, std::size_t reps, Rng& rng,
                                           std::size_t threads = 1);

struct LrProbe {
    ParamPoint theta0;
    ParamPoint theta1;
    Observation x;
};

/// Mean squared error of the estimated log odds ratio against the exact log
/// density ratio over `probe`.
double lr_mse(const OddsModel& odds, std::span<const LrProbe> probe);

} // namespace acore
