#include <gtest/gtest.h>

#include <cmath>

#include "acore/error.hpp"
#include "acore/models.hpp"

using namespace acore;

namespace {

double sample_mean(const Dataset& d, std::size_t c) {
    double s = 0.0;
    for (const auto& x : d) s += x[c];
    return s / static_cast<double>(d.size());
}

double sample_var(const Dataset& d, std::size_t c) {
    const double m = sample_mean(d, c);
    double s = 0.0;
    for (const auto& x : d) s += (x[c] - m) * (x[c] - m);
    return s / static_cast<double>(d.size() - 1);
}

} // namespace

TEST(Models, Defaults) {
    const auto p = make_model(ModelKind::poisson_counting);
    EXPECT_EQ(p.params.grid_size(), 100u);
    EXPECT_EQ(p.n_obs, 10u);
    EXPECT_EQ(p.true_theta, ParamPoint{10.0});
    EXPECT_DOUBLE_EQ(p.reference[0].mean, 110.0);
    EXPECT_DOUBLE_EQ(p.reference[0].sd, 15.0);

    const auto sb = make_model(ModelKind::signal_background);
    EXPECT_EQ(sb.params.dim(), 2u);
    EXPECT_EQ(sb.data_dim, 2u);
    // Prior predictive: E[N] = 10 + 90, Var[N] = 100 + 400/12 + 400/12.
    EXPECT_DOUBLE_EQ(sb.reference[0].mean, 100.0);
    EXPECT_NEAR(sb.reference[0].sd, std::sqrt(100.0 + 800.0 / 12.0), 1e-12);
    EXPECT_DOUBLE_EQ(sb.reference[1].mean, 90.0);
    EXPECT_NEAR(sb.reference[1].sd, std::sqrt(90.0 + 400.0 / 12.0), 1e-12);
}

TEST(Models, SimulationIsSeedDeterministic) {
    const auto m = make_model(ModelKind::gmm);
    Rng a(99), b(99);
    EXPECT_EQ(simulate(m, ParamPoint{3.0}, 50, a), simulate(m, ParamPoint{3.0}, 50, b));
}

TEST(Models, RejectsOutOfBoundsTheta) {
    const auto m = make_model(ModelKind::poisson_counting);
    Rng rng(1);
    EXPECT_THROW(simulate(m, ParamPoint{-1.0}, 10, rng), DomainError);
    EXPECT_THROW(simulate(m, ParamPoint{5.0}, 0, rng), DomainError);
}

TEST(Models, EmpiricalMomentsMatchAnalytic) {
    Rng rng(2024);
    const std::size_t n = 40000;
    for (auto kind : {ModelKind::poisson_counting, ModelKind::gmm, ModelKind::signal_background,
                      ModelKind::gaussian_mean}) {
        const auto m = make_model(kind);
        const auto theta = m.true_theta;
        const auto data = simulate(m, theta, n, rng);
        const auto mom = analytic_moments(m, theta);
        for (std::size_t c = 0; c < m.data_dim; ++c) {
            const double se = std::sqrt(mom.variance[c] / static_cast<double>(n));
            EXPECT_NEAR(sample_mean(data, c), mom.mean[c], 4.0 * se) << m.name();
            EXPECT_NEAR(sample_var(data, c) / mom.variance[c], 1.0, 0.05) << m.name();
        }
    }
}

TEST(Models, ReferenceDrawsMatchReference) {
    const auto m = make_model(ModelKind::poisson_counting);
    Rng rng(5);
    Dataset d;
    for (int i = 0; i < 20000; ++i) d.push_back(reference_draw(m, rng));
    EXPECT_NEAR(sample_mean(d, 0), 110.0, 4.0 * 15.0 / std::sqrt(20000.0));
}

TEST(Models, PriorDrawsStayInRegion) {
    const auto m = make_model(ModelKind::signal_background);
    Rng rng(6);
    const Box region{{{2.0, 3.0}, {85.0, 85.0}}};
    for (int i = 0; i < 1000; ++i) {
        const auto t = prior_draw(m, region, rng);
        EXPECT_TRUE(region.contains(t));
    }
}

TEST(Models, LogDensities) {
    const auto p = make_model(ModelKind::poisson_counting);
    // log Poisson(110; 110), scipy.stats.poisson.logpmf(110, 110).
    EXPECT_NEAR(exact_logpdf(p, ParamPoint{10.0}, Observation{110.0}) - reference_logpdf(p, Observation{110.0}),
                0.35705244453541773, 1e-12);
    EXPECT_EQ(exact_logpdf(p, ParamPoint{10.0}, Observation{-1.0}), -std::numeric_limits<double>::infinity());

    const auto g = make_model(ModelKind::gmm);
    EXPECT_NEAR(exact_logpdf(g, ParamPoint{2.0}, Observation{1.3}), -1.8515843098549605, 1e-12);

    const auto sb = make_model(ModelKind::signal_background);
    // log Poisson(84; 81.5) + log Poisson(79; 80).
    const double expect = 84.0 * std::log(81.5) - 81.5 - std::lgamma(85.0) + 79.0 * std::log(80.0) - 80.0 -
                          std::lgamma(80.0);
    EXPECT_NEAR(exact_logpdf(sb, ParamPoint{1.5, 80.0}, Observation{84.0, 79.0}), expect, 1e-10);
}

TEST(Models, LoglikManyMatchesPointwise) {
    Rng rng(8);
    for (auto kind : {ModelKind::poisson_counting, ModelKind::gmm, ModelKind::signal_background,
                      ModelKind::gaussian_mean}) {
        const auto m = make_model(kind);
        const auto data = simulate(m, m.true_theta, m.n_obs, rng);
        const auto& grid = m.params.grid();
        std::vector<double> many(grid.size());
        exact_loglik_many(m, grid, data, many);
        for (std::size_t j = 0; j < grid.size(); j += 7)
            EXPECT_NEAR(many[j], exact_loglik(m, grid[j], data), 1e-9 * (1.0 + std::abs(many[j]))) << m.name();
    }
}
