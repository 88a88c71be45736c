#include "acore/labeled_sample.hpp"

#include "acore/error.hpp"
#include "acore/parallel.hpp"

namespace acore {

std::size_t LabeledSet::count_positive() const noexcept {
    std::size_t n = 0;
    for (const auto& e : examples) n += (e.y == 1);
    return n;
}

LabeledSet generate_labeled_sample(const ModelSpec& model, std::size_t count, double p, Rng& rng,
                                   std::size_t threads) {
    if (count < 1) throw DomainError("labeled sample size must be at least 1");
    if (!(p > 0.0 && p <= 1.0)) throw DomainError("Bernoulli p must lie in (0, 1]");

    LabeledSet out;
    out.bernoulli_p = p;
    out.examples.resize(count);
    const std::uint64_t base = rng.next_u64();
    parallel_for(count, threads, [&](std::size_t i) {
        Rng local(derive_seed(base, i));
        auto& e = out.examples[i];
        e.theta = prior_draw(model, local);
        e.y = local.bernoulli(p) ? 1 : 0;
        e.x = e.y == 1 ? simulate_one(model, e.theta, local) : reference_draw(model, local);
    });
    return out;
}

} // namespace acore
