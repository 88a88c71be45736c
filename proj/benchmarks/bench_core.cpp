#include <benchmark/benchmark.h>

#include "acore/classifiers.hpp"
#include "acore/odds.hpp"
#include "acore/oracle.hpp"
#include "acore/quantile.hpp"

using namespace acore;

namespace {

void BM_TauGridQda(benchmark::State& state) {
    const auto model = make_model(ModelKind::poisson_counting);
    Rng rng(1);
    const auto sample = generate_labeled_sample(model, 1000, 0.5, rng);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::qda;
    const auto odds = train_odds(sample, spec, model, rng);
    const auto data = simulate(model, model.true_theta, model.n_obs, rng);
    const auto all = model.params.all();
    for (auto _ : state) benchmark::DoNotOptimize(acore_statistic(odds, data, all));
}
BENCHMARK(BM_TauGridQda);

void BM_BoostedQuantileFit(benchmark::State& state) {
    const auto model = make_model(ModelKind::poisson_counting);
    const auto odds = exact_odds_model(model);
    Rng rng(2);
    const auto set = simulate_tau_set(odds, static_cast<std::size_t>(state.range(0)), NullMode::pointwise, rng);
    for (auto _ : state) benchmark::DoNotOptimize(fit_quantile(set, 0.1));
}
BENCHMARK(BM_BoostedQuantileFit)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_QdaPipeline(benchmark::State& state) {
    const auto model = make_model(ModelKind::poisson_counting);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::qda;
    std::uint64_t seed = 3;
    for (auto _ : state) {
        Rng rng(seed++);
        const auto sample = generate_labeled_sample(model, 1000, 0.5, rng);
        const auto odds = train_odds(sample, spec, model, rng);
        const auto set = simulate_tau_set(odds, 5000, NullMode::pointwise, rng);
        const auto surface = critical_surface(fit_quantile(set, 0.1), model.params);
        benchmark::DoNotOptimize(surface.data());
    }
}
BENCHMARK(BM_QdaPipeline)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
