#include <gtest/gtest.h>

#include <cmath>

#include "acore/error.hpp"
#include "acore/neyman.hpp"
#include "acore/oracle.hpp"
#include "acore/quantile.hpp"

using namespace acore;

TEST(TestDecision, TieAccepts) {
    EXPECT_FALSE(test_decision(-1.0, -1.0));
    EXPECT_TRUE(test_decision(-1.0 - 1e-12, -1.0));
    EXPECT_FALSE(test_decision(0.0, -1.0));
}

TEST(ConfidenceSet, FromProfile) {
    // Profile peaks at index 2; τ_j = profile[j] - 3.
    const std::vector<double> profile{0.0, 2.0, 3.0, 1.0, -5.0};
    const std::vector<double> surface{-2.0, -2.0, -2.0, -2.0, -2.0};
    const auto set = confidence_set_from_profile(profile, surface, 0.1);
    EXPECT_EQ(set.accepted, (std::vector<std::size_t>{1, 2, 3}));
    EXPECT_EQ(set.tau, (std::vector<double>{-3.0, -1.0, 0.0, -2.0, -8.0}));
    EXPECT_TRUE(set.contains(3));
    EXPECT_FALSE(set.contains(0));
    EXPECT_DOUBLE_EQ(set.size_fraction, 0.6);
    EXPECT_DOUBLE_EQ(set_power(set, 2), 0.5);
}

TEST(ConfidenceSet, ArgmaxAlwaysAcceptedUnderNonPositiveCutoffs) {
    const auto model = make_model(ModelKind::poisson_counting);
    const auto odds = exact_odds_model(model);
    const std::vector<double> surface(model.params.grid_size(), -1e-9);
    Rng rng(90);
    for (int r = 0; r < 20; ++r) {
        const auto data = simulate(model, model.true_theta, model.n_obs, rng);
        const auto set = confidence_set(odds, surface, data, 0.1);
        ASSERT_EQ(set.accepted.size(), 1u);
        EXPECT_EQ(set.tau[set.accepted[0]], 0.0);
    }
}

TEST(ConfidenceSet, SurfaceLengthMustMatchGrid) {
    const auto model = make_model(ModelKind::gaussian_mean);
    const auto odds = exact_odds_model(model);
    Rng rng(91);
    const auto data = simulate(model, model.true_theta, model.n_obs, rng);
    EXPECT_THROW(confidence_set(odds, std::vector<double>(3, 0.0), data, 0.1), DomainError);
}

TEST(ConfidenceSet, NestedInAlpha) {
    const auto model = make_model(ModelKind::gaussian_mean);
    const auto odds = exact_odds_model(model);
    Rng rng(92);
    const auto train = simulate_tau_set(odds, 2000, NullMode::pointwise, rng);
    const auto lo = critical_surface(fit_quantile(train, 0.05, QuantileKind::knn_quantile), model.params);
    const auto hi = critical_surface(fit_quantile(train, 0.2, QuantileKind::knn_quantile), model.params);
    for (int r = 0; r < 20; ++r) {
        const auto data = simulate(model, model.true_theta, model.n_obs, rng);
        const auto wide = confidence_set(odds, lo, data, 0.05);
        const auto narrow = confidence_set(odds, hi, data, 0.2);
        for (std::size_t j : narrow.accepted) EXPECT_TRUE(wide.contains(j));
    }
}

TEST(EvaluateAtTruth, ExactSurfaceCoversAtNominalRate) {
    const auto model = make_model(ModelKind::gaussian_mean);
    const auto odds = exact_odds_model(model);
    Rng rng(93);
    const auto surface = exact_critical_surface(model, 0.1, 4000, rng, 4);
    const std::size_t reps = 2000;
    const auto eval = evaluate_at_truth(odds, surface, model.true_theta, 0.1, reps, rng, 4);
    EXPECT_EQ(eval.reps, reps);
    EXPECT_EQ(eval.true_index, model.params.nearest_index(model.true_theta));
    EXPECT_NEAR(eval.coverage, 0.9, 3.0 * std::sqrt(0.09 / reps) + 0.01);
    EXPECT_GT(eval.power, 0.5);
    EXPECT_LT(eval.size_mean, 50.0);
}

TEST(EvaluateAtTruth, ThreadCountDoesNotChangeResult) {
    const auto model = make_model(ModelKind::poisson_counting);
    const auto odds = exact_odds_model(model);
    const std::vector<double> surface(model.params.grid_size(), -1.35);
    Rng a(94), b(94);
    const auto one = evaluate_at_truth(odds, surface, model.true_theta, 0.1, 50, a, 1);
    const auto many = evaluate_at_truth(odds, surface, model.true_theta, 0.1, 50, b, 5);
    EXPECT_EQ(one.power, many.power);
    EXPECT_EQ(one.size_mean, many.size_mean);
    EXPECT_EQ(one.coverage, many.coverage);
}
