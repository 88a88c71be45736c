#include "acore/neyman.hpp"

#include <cmath>

#include "acore/error.hpp"
#include "acore/parallel.hpp"

namespace acore {

ConfidenceSet confidence_set_from_profile(std::span<const double> profile, std::span<const double> surface,
                                          double alpha) {
    if (profile.size() != surface.size() || profile.empty())
        throw DomainError("critical surface does not match the grid");
    ConfidenceSet set;
    set.alpha = alpha;
    double best = profile[0];
    for (double v : profile) best = std::max(best, v);
    set.tau.resize(profile.size());
    set.cutoffs.assign(surface.begin(), surface.end());
    set.accept_flag.assign(profile.size(), 0);
    for (std::size_t j = 0; j < profile.size(); ++j) {
        set.tau[j] = profile[j] - best;
        if (!test_decision(set.tau[j], surface[j])) {
            set.accept_flag[j] = 1;
            set.accepted.push_back(j);
        }
    }
    set.size_fraction = static_cast<double>(set.accepted.size()) / static_cast<double>(profile.size());
    return set;
}

ConfidenceSet confidence_set(const OddsModel& odds, std::span<const double> surface, const Dataset& data,
                             double alpha) {
    if (data.empty()) throw DomainError("empty dataset");
    return confidence_set_from_profile(odds.grid_profile(data), surface, alpha);
}

double set_power(const ConfidenceSet& set, std::size_t true_index) {
    const std::size_t g = set.accept_flag.size();
    if (g < 2) return 0.0;
    std::size_t rejected = 0;
    for (std::size_t j = 0; j < g; ++j)
        if (j != true_index && !set.accept_flag[j]) ++rejected;
    return static_cast<double>(rejected) / static_cast<double>(g - 1);
}

TruthEvaluation evaluate_at_truth(const OddsModel& odds, std::span<const double> surface,
                                  const ParamPoint& true_theta, double alpha, std::size_t reps, Rng& rng,
                                  std::size_t threads) {
    if (reps < 1) throw DomainError("reps must be at least 1");
    const auto& model = odds.model();
    model.params.require_contains(true_theta);
    TruthEvaluation ev;
    ev.reps = reps;
    ev.true_index = model.params.nearest_index(true_theta);

    const std::uint64_t base = rng.next_u64();
    std::vector<double> power(reps), size(reps), covered(reps);
    parallel_for(reps, threads, [&](std::size_t r) {
        Rng local(derive_seed(base, r));
        const auto data = simulate(model, true_theta, model.n_obs, local);
        const auto set = confidence_set(odds, surface, data, alpha);
        power[r] = set_power(set, ev.true_index);
        size[r] = 100.0 * set.size_fraction;
        covered[r] = set.contains(ev.true_index) ? 1.0 : 0.0;
    });

    double ssum = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
        ev.power += power[r];
        ssum += size[r];
        ev.coverage += covered[r];
    }
    const double n = static_cast<double>(reps);
    ev.power /= n;
    ev.coverage /= n;
    ev.size_mean = ssum / n;
    double var = 0.0;
    for (double s : size) var += (s - ev.size_mean) * (s - ev.size_mean);
    ev.size_sd = reps > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    return ev;
}

double average_power(const OddsModel& odds, std::span<const double> surface, const ParamPoint& true_theta,
                     std::size_t reps, Rng& rng, std::size_t threads) {
    return evaluate_at_truth(odds, surface, true_theta, 0.1, reps, rng, threads).power;
}

} // namespace acore
