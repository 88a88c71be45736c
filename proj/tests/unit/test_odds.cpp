#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "acore/error.hpp"
#include "acore/odds.hpp"
#include "acore/oracle.hpp"

using namespace acore;

namespace {

class InfiniteOdds final : public OddsSource {
public:
    std::string label() const override { return "infinite"; }
    double log_odds(const ParamPoint&, const Observation&) const override {
        return std::numeric_limits<double>::infinity();
    }
    void save(std::ostream&) const override {}
};

double mean_and_se(const std::vector<double>& v, double* se) {
    double m = 0.0;
    for (double x : v) m += x / static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - m) * (x - m) / static_cast<double>(v.size() - 1);
    *se = std::sqrt(var / static_cast<double>(v.size()));
    return m;
}

} // namespace

TEST(Odds, EvenOddsForHalfProbability) {
    const OddsModel m(std::make_shared<ConstantOdds>(0.5), make_model(ModelKind::gmm));
    EXPECT_DOUBLE_EQ(odds(m, ParamPoint{3.0}, Observation{1.0}), 1.0);
    EXPECT_DOUBLE_EQ(m.probability(ParamPoint{3.0}, Observation{1.0}), 0.5);
}

TEST(Odds, ExactOracleAtPoissonMode) {
    // Poisson(110; 110) / N(110; 110, 15^2), evaluated with scipy.
    const auto m = exact_odds_model(make_model(ModelKind::poisson_counting));
    EXPECT_NEAR(odds(m, ParamPoint{10.0}, Observation{110.0}), 1.429110816941432, 1e-12);
}

TEST(Odds, SaturatedClassifierIsClipped) {
    const OddsModel m(std::make_shared<InfiniteOdds>(), make_model(ModelKind::gmm));
    const double eps = OddsModel::kDefaultClipEps;
    EXPECT_NEAR(odds(m, ParamPoint{1.0}, Observation{0.0}) / ((1.0 - eps) / eps), 1.0, 1e-9);
    EXPECT_DOUBLE_EQ(m.probability(ParamPoint{1.0}, Observation{0.0}), 1.0 - eps);
}

TEST(Odds, OddsRatioIdentities) {
    const auto model = make_model(ModelKind::gmm);
    const auto m = exact_odds_model(model);
    Rng rng(41);
    for (int i = 0; i < 50; ++i) {
        const auto a = prior_draw(model, rng), b = prior_draw(model, rng), c = prior_draw(model, rng);
        const Observation x{rng.normal(0.0, 4.0)};
        EXPECT_EQ(odds_ratio(m, x, a, a), 1.0);
        EXPECT_NEAR(odds_ratio(m, x, a, b) * odds_ratio(m, x, b, a), 1.0, 1e-12);
        EXPECT_NEAR(log_odds_ratio(m, x, a, b) + log_odds_ratio(m, x, b, c), log_odds_ratio(m, x, a, c), 1e-12);
        const double density_ratio = exact_logpdf(model, a, x) - exact_logpdf(model, b, x);
        EXPECT_NEAR(log_odds_ratio(m, x, a, b), density_ratio, 1e-12);
    }
}

TEST(Odds, OutOfBoundsThetaRejected) {
    const auto m = exact_odds_model(make_model(ModelKind::gmm));
    EXPECT_THROW(odds(m, ParamPoint{11.0}, Observation{0.0}), DomainError);
}

TEST(Tau, SimpleNullOnGridIsNonPositive) {
    const auto model = make_model(ModelKind::poisson_counting);
    const auto m = exact_odds_model(model);
    Rng rng(42);
    for (int i = 0; i < 30; ++i) {
        const auto data = simulate(model, prior_draw(model, rng), model.n_obs, rng);
        const auto j = rng.index(model.params.grid_size());
        const auto r = acore_statistic(m, data, {j});
        EXPECT_LE(r.tau, 0.0);
        EXPECT_EQ(r.argmax_theta0, j);
    }
}

TEST(Tau, FullGridNullGivesZero) {
    const auto model = make_model(ModelKind::gmm);
    const auto m = exact_odds_model(model);
    Rng rng(43);
    const auto data = simulate(model, ParamPoint{4.0}, model.n_obs, rng);
    const auto r = acore_statistic(m, data, model.params.all());
    EXPECT_EQ(r.tau, 0.0);
    EXPECT_EQ(r.argmax_theta0, r.argmin_theta1);
}

TEST(Tau, TiesGoToLowestIndex) {
    const auto model = make_model(ModelKind::gmm);
    const OddsModel m(std::make_shared<ConstantOdds>(0.3), model);
    Rng rng(44);
    const auto data = simulate(model, ParamPoint{4.0}, model.n_obs, rng);
    const auto r = acore_statistic(m, data, {5, 6, 7});
    EXPECT_EQ(r.tau, 0.0);
    EXPECT_EQ(r.argmax_theta0, 5u);
    EXPECT_EQ(r.argmin_theta1, 0u);
}

TEST(Tau, EmptyRegionIsADomainError) {
    const auto model = make_model(ModelKind::gmm);
    const auto m = exact_odds_model(model);
    Rng rng(45);
    const auto data = simulate(model, ParamPoint{4.0}, model.n_obs, rng);
    EXPECT_THROW(acore_statistic(m, data, {}), DomainError);
}

TEST(Tau, InvariantUnderPermutation) {
    const auto model = make_model(ModelKind::signal_background);
    Rng rng(46);
    const auto train = generate_labeled_sample(model, 500, 0.5, rng);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::qda;
    const auto m = train_odds(train, spec, model, rng);
    auto data = simulate(model, model.true_theta, model.n_obs, rng);
    const GridSubset region{3, 40, 41, 200};
    const double before = acore_statistic(m, data, region).tau;
    std::mt19937_64 shuffler(7);
    std::shuffle(data.begin(), data.end(), shuffler);
    EXPECT_NEAR(acore_statistic(m, data, region).tau, before, 1e-9);
}

TEST(Tau, MatchesExactLikelihoodRatio) {
    for (auto kind : {ModelKind::poisson_counting, ModelKind::gmm, ModelKind::gaussian_mean}) {
        const auto model = make_model(kind);
        const auto m = exact_odds_model(model);
        Rng rng(47);
        for (int i = 0; i < 20; ++i) {
            const auto data = simulate(model, prior_draw(model, rng), model.n_obs, rng);
            const GridSubset region{rng.index(model.params.grid_size())};
            EXPECT_NEAR(acore_statistic(m, data, region).tau, exact_lr_statistic(model, data, region), 1e-10);
        }
    }
}

TEST(Tau, OffGridSimpleNullIsNonPositive) {
    const auto model = make_model(ModelKind::gmm);
    const auto m = exact_odds_model(model);
    Rng rng(48);
    for (int i = 0; i < 30; ++i) {
        const auto theta = prior_draw(model, rng);
        const auto data = simulate(model, theta, model.n_obs, rng);
        EXPECT_LE(tau_simple(m, data, theta), 0.0);
    }
}

TEST(CrossEntropy, ConstantHalfIsLogTwo) {
    const auto model = make_model(ModelKind::poisson_counting);
    const OddsModel m(std::make_shared<ConstantOdds>(0.5), model);
    Rng rng(49);
    const auto holdout = generate_labeled_sample(model, 100, 0.5, rng);
    EXPECT_NEAR(cross_entropy(m, holdout), std::log(2.0), 1e-15);
}

TEST(CrossEntropy, ExactOracleValues) {
    // Reference values from an independent Monte Carlo of the exact posterior
    // (10^6 draws): Poisson 0.6424, GMM 0.3926.
    const struct {
        ModelKind kind;
        double expected;
    } cases[] = {{ModelKind::poisson_counting, 0.6424}, {ModelKind::gmm, 0.3926}};
    for (const auto& c : cases) {
        const auto model = make_model(c.kind);
        Rng rng(50);
        const auto holdout = generate_labeled_sample(model, 10000, 0.5, rng);
        EXPECT_NEAR(cross_entropy(exact_odds_model(model), holdout), c.expected, 0.015) << model.name();
    }
}

TEST(CrossEntropy, ExactOracleBeatsTrainedClassifier) {
    const auto model = make_model(ModelKind::poisson_counting);
    Rng rng(51);
    const auto train = generate_labeled_sample(model, 1000, 0.5, rng);
    const auto holdout = generate_labeled_sample(model, 5000, 0.5, rng);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::qda;
    const auto trained = train_odds(train, spec, model, rng);
    const auto exact = exact_odds_model(model);
    const auto a = cross_entropy_terms(exact, holdout);
    const auto b = cross_entropy_terms(trained, holdout);
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    double se = 0.0;
    const double d = mean_and_se(diff, &se);
    EXPECT_LE(d, 2.0 * se);
}

TEST(OddsModel, SaveLoadRoundTrip) {
    const auto model = make_model(ModelKind::gmm);
    Rng rng(52);
    const auto train = generate_labeled_sample(model, 400, 0.5, rng);
    ClassifierSpec spec;
    spec.kind = ClassifierKind::mlp;
    spec.max_epochs = 20;
    const auto m = train_odds(train, spec, model, rng);
    std::stringstream buf;
    m.save(buf);
    const auto back = load_odds(buf, model);
    for (double x : {-3.0, 0.1, 2.0})
        EXPECT_EQ(m.log_odds(ParamPoint{2.5}, Observation{x}), back.log_odds(ParamPoint{2.5}, Observation{x}));

    std::stringstream again;
    m.save(again);
    EXPECT_THROW(load_odds(again, make_model(ModelKind::poisson_counting)), ConfigError);

    std::stringstream exact_buf;
    exact_odds_model(model).save(exact_buf);
    EXPECT_EQ(load_odds(exact_buf, model).label(), "exact");
}

TEST(OddsModel, TrainingRejectsMismatchedSample) {
    Rng rng(53);
    const auto sample = generate_labeled_sample(make_model(ModelKind::signal_background), 100, 0.5, rng);
    ClassifierSpec spec;
    EXPECT_THROW(train_odds(sample, spec, make_model(ModelKind::gmm), rng), DomainError);
}
