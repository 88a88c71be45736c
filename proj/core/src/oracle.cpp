#include "acore/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "acore/error.hpp"
#include "acore/parallel.hpp"
#include "acore/quantile.hpp"

namespace acore {

ExactOddsOracle::ExactOddsOracle(ModelSpec model, double p) : model_(std::move(model)), p_(p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("oracle p must be in (0, 1)");
    prior_log_odds_ = std::log(p) - std::log1p(-p);
}

double ExactOddsOracle::log_odds(const ParamPoint& theta, const Observation& x) const {
    return prior_log_odds_ + exact_logpdf(model_, theta, x) - reference_logpdf(model_, x);
}

void ExactOddsOracle::sum_log_odds(std::span<const ParamPoint> thetas, const Dataset& data,
                                   std::span<double> out) const {
    exact_loglik_many(model_, thetas, data, out);
    double shift = prior_log_odds_ * static_cast<double>(data.size());
    for (const auto& x : data) shift -= reference_logpdf(model_, x);
    for (auto& v : out) v += shift;
}

void ExactOddsOracle::save(std::ostream& out) const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", p_);
    out << "source exact " << buf << '\n';
}

OddsModel exact_odds_model(const ModelSpec& model, double p) {
    return OddsModel(std::make_shared<ExactOddsOracle>(model, p), model);
}

double exact_lr_statistic(const ModelSpec& model, const Dataset& data, const GridSubset& theta0_region) {
    if (theta0_region.empty()) throw DomainError("null region is empty");
    const auto& grid = model.params.grid();
    std::vector<double> ll(grid.size());
    exact_loglik_many(model, grid, data, ll);
    return tau_from_profile(ll, theta0_region).tau;
}

double mc_exact_critical(const ModelSpec& model, const DatasetStatistic& statistic, const ParamPoint& theta0,
                         double alpha, std::size_t reps, Rng& rng) {
    if (reps < 100) throw DomainError("mc_exact_critical needs at least 100 repetitions");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must be in (0, 1)");
    std::vector<double> values(reps);
    for (auto& v : values) v = statistic(simulate(model, theta0, model.n_obs, rng));
    return empirical_quantile(std::move(values), alpha);
}

std::vector<double> exact_critical_surface(const ModelSpec& model, double alpha, std::size_t reps, Rng& rng,
                                           std::size_t threads) {
    if (reps < 100) throw DomainError("exact critical surface needs at least 100 repetitions");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must be in (0, 1)");
    const auto& grid = model.params.grid();
    const std::uint64_t base = rng.next_u64();
    std::vector<double> surface(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t j) {
        Rng local(derive_seed(base, j));
        std::vector<double> ll(grid.size());
        std::vector<double> values(reps);
        for (auto& v : values) {
            const auto data = simulate(model, grid[j], model.n_obs, local);
            exact_loglik_many(model, grid, data, ll);
            v = tau_from_profile(ll, GridSubset{j}).tau;
        }
        surface[j] = empirical_quantile(std::move(values), alpha);
    });
    return surface;
}

double lr_mse(const OddsModel& odds, std::span<const LrProbe> probe) {
    if (probe.empty()) throw DomainError("empty probe set");
    const auto& model = odds.model();
    double s = 0.0;
    for (const auto& q : probe) {
        const double est = log_odds_ratio(odds, q.x, q.theta0, q.theta1);
        const double exact = exact_logpdf(model, q.theta0, q.x) - exact_logpdf(model, q.theta1, q.x);
        s += (est - exact) * (est - exact);
    }
    return s / static_cast<double>(probe.size());
}

} // namespace acore
