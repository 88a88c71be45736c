#pragma once

#include <cstdint>
#include <random>

namespace acore {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for child stream `index` of a master seed. Deterministic and
/// independent of scheduling, so parallel loops can use one stream per index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Seeded random stream. All randomness in the library flows through an
/// explicit Rng; nothing reads the clock.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

    std::uint64_t seed() const noexcept { return seed_; }

    /// Independent child stream; does not advance this stream.
    Rng child(std::uint64_t index) const { return Rng(derive_seed(seed_, index)); }

    /// Draws a fresh 64-bit value (advances this stream).
    std::uint64_t next_u64() { return engine_(); }

    double uniform(double lo, double hi);
    double normal(double mean, double sd);
    double poisson(double mean);
    bool bernoulli(double p);
    std::size_t index(std::size_t n);

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace acore
