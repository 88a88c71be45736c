#include <gtest/gtest.h>

#include <cmath>

#include "acore/error.hpp"
#include "acore/oracle.hpp"

using namespace acore;

namespace {

double mean_x(const Dataset& d) {
    double s = 0.0;
    for (const auto& x : d) s += x[0];
    return s / static_cast<double>(d.size());
}

} // namespace

TEST(ExactLr, FullGridIsZero) {
    const auto model = make_model(ModelKind::poisson_counting);
    Rng rng(61);
    const auto data = simulate(model, ParamPoint{3.0}, model.n_obs, rng);
    EXPECT_EQ(exact_lr_statistic(model, data, model.params.all()), 0.0);
}

TEST(ExactLr, NeverPositive) {
    for (auto kind : {ModelKind::poisson_counting, ModelKind::gmm, ModelKind::signal_background}) {
        const auto model = make_model(kind);
        Rng rng(62);
        for (int i = 0; i < 20; ++i) {
            const auto data = simulate(model, prior_draw(model, rng), model.n_obs, rng);
            EXPECT_LE(exact_lr_statistic(model, data, {rng.index(model.params.grid_size())}), 0.0);
        }
    }
}

TEST(ExactLr, GaussianMeanClosedForm) {
    const auto model = make_model(ModelKind::gaussian_mean);
    const double n = static_cast<double>(model.n_obs);
    Rng rng(63);
    for (int i = 0; i < 25; ++i) {
        const auto data = simulate(model, prior_draw(model, rng), model.n_obs, rng);
        const double xbar = mean_x(data);
        const auto j0 = rng.index(model.params.grid_size());
        const double t0 = model.params.grid_point(j0)[0];
        const double mle = model.params.grid_point(model.params.nearest_index(ParamPoint{std::clamp(xbar, -5.0, 5.0)}))[0];
        const double expected = -0.5 * n * ((xbar - t0) * (xbar - t0) - (xbar - mle) * (xbar - mle));
        EXPECT_NEAR(exact_lr_statistic(model, data, {j0}), expected, 1e-9);
    }
}

TEST(McExactCritical, ConstantStatistic) {
    const auto model = make_model(ModelKind::gmm);
    Rng rng(64);
    EXPECT_EQ(mc_exact_critical(model, [](const Dataset&) { return -2.5; }, ParamPoint{1.0}, 0.1, 100, rng), -2.5);
    EXPECT_THROW(mc_exact_critical(model, [](const Dataset&) { return 0.0; }, ParamPoint{1.0}, 0.1, 99, rng),
                 DomainError);
}

TEST(McExactCritical, GaussianMeanMatchesWilks) {
    // Λ = -(n/2)(xbar - θ0)^2 exactly, so its 0.1 quantile is -χ²₁(0.9)/2.
    const auto model = make_model(ModelKind::gaussian_mean);
    const auto j0 = model.params.nearest_index(ParamPoint{0.0});
    const auto theta0 = model.params.grid_point(j0);
    const DatasetStatistic lr = [&](const Dataset& d) { return exact_lr_statistic(model, d, {j0}); };
    Rng rng(65);
    EXPECT_NEAR(mc_exact_critical(model, lr, theta0, 0.1, 100000, rng), -1.352771727047702, 0.03);
}

TEST(McExactCritical, NonDecreasingInAlpha) {
    const auto model = make_model(ModelKind::poisson_counting);
    const DatasetStatistic lr = [&](const Dataset& d) { return exact_lr_statistic(model, d, {50}); };
    double prev = -std::numeric_limits<double>::infinity();
    for (double alpha : {0.01, 0.05, 0.1, 0.3, 0.5}) {
        Rng rng(66);
        const double c = mc_exact_critical(model, lr, model.params.grid_point(50), alpha, 2000, rng);
        EXPECT_GE(c, prev);
        prev = c;
    }
}

TEST(ExactCriticalSurface, IndependentOfThreads) {
    auto model = make_model(ModelKind::gmm, 12);
    Rng a(67), b(67);
    EXPECT_EQ(exact_critical_surface(model, 0.1, 300, a, 1), exact_critical_surface(model, 0.1, 300, b, 3));
}

TEST(LrMse, ExactOracleIsZero) {
    const auto model = make_model(ModelKind::gaussian_mean);
    Rng rng(68);
    std::vector<LrProbe> probe;
    for (int i = 0; i < 100; ++i)
        probe.push_back({prior_draw(model, rng), prior_draw(model, rng), Observation{rng.normal(0.0, 2.0)}});
    EXPECT_LT(lr_mse(exact_odds_model(model), probe), 1e-20);
}

TEST(LrMse, ConstantClassifierGivesSquaredLogRatio) {
    const auto model = make_model(ModelKind::gaussian_mean);
    const OddsModel flat(std::make_shared<ConstantOdds>(0.5), model);
    Rng rng(69);
    std::vector<LrProbe> probe;
    double expected = 0.0;
    for (int i = 0; i < 100; ++i) {
        LrProbe q{prior_draw(model, rng), prior_draw(model, rng), Observation{rng.normal(0.0, 2.0)}};
        const double x = q.x[0], a = q.theta0[0], b = q.theta1[0];
        const double r = -0.5 * (x - a) * (x - a) + 0.5 * (x - b) * (x - b);
        expected += r * r / 100.0;
        probe.push_back(q);
    }
    EXPECT_NEAR(lr_mse(flat, probe), expected, 1e-10 * (1.0 + expected));
    EXPECT_THROW(lr_mse(flat, std::span<const LrProbe>{}), DomainError);
}
