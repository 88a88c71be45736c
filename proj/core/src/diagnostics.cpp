#include "acore/diagnostics.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "acore/error.hpp"
#include "acore/parallel.hpp"

namespace acore {

namespace {

constexpr double kSeparation = 1e-6;
constexpr double kShrinkRidge = 1e-2;

Eigen::VectorXd quadratic_features(const ParamPoint& theta, const ParamSpace& space) {
    const std::size_t dim = space.dim();
    std::vector<double> u(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        const auto& iv = space.bounds()[d];
        u[d] = 2.0 * (theta[d] - iv.lower) / iv.width() - 1.0;
    }
    Eigen::VectorXd f(1 + dim + dim * (dim + 1) / 2);
    Eigen::Index k = 0;
    f(k++) = 1.0;
    for (std::size_t d = 0; d < dim; ++d) f(k++) = u[d];
    for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t b = a; b < dim; ++b) f(k++) = u[a] * u[b];
    return f;
}

struct LogisticFit {
    Eigen::VectorXd beta;
    Eigen::MatrixXd covariance;
    bool converged = false;
};

double sigmoid(double s) { return 1.0 / (1.0 + std::exp(-s)); }

double softplus(double s) { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

LogisticFit weighted_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                              double ridge) {
    const Eigen::Index p = x.cols();
    Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p, ridge);
    penalty(0) = 0.0;
    const auto objective = [&](const Eigen::VectorXd& b) {
        const Eigen::VectorXd eta = x * b;
        double s = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) s += w(i) * (softplus(eta(i)) - y(i) * eta(i));
        return s + 0.5 * (penalty.array() * b.array().square()).sum();
    };

    LogisticFit fit;
    fit.beta = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd info(p, p);
    double loss = objective(fit.beta);
    for (int iter = 0; iter < 100; ++iter) {
        const Eigen::VectorXd eta = x * fit.beta;
        Eigen::VectorXd prob(x.rows()), h(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            prob(i) = sigmoid(eta(i));
            h(i) = w(i) * prob(i) * (1.0 - prob(i));
        }
        const Eigen::VectorXd grad =
            x.transpose() * (w.array() * (prob - y).array()).matrix() + (penalty.array() * fit.beta.array()).matrix();
        info = x.transpose() * h.asDiagonal() * x;
        info.diagonal() += penalty;
        info.diagonal().array() += 1e-10;
        if (grad.lpNorm<Eigen::Infinity>() < 1e-9) {
            fit.converged = true;
            break;
        }
        const Eigen::VectorXd step = info.ldlt().solve(grad);
        double scale = 1.0;
        Eigen::VectorXd candidate = fit.beta - step;
        double cand = objective(candidate);
        while (!(cand <= loss) && scale > 1e-8) {
            scale *= 0.5;
            candidate = fit.beta - scale * step;
            cand = objective(candidate);
        }
        if (!(cand <= loss)) break;
        const double change = loss - cand;
        fit.beta = candidate;
        loss = cand;
        if (change < 1e-12 * (1.0 + std::abs(loss))) {
            fit.converged = true;
            break;
        }
    }
    fit.covariance = info.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    return fit;
}

} // namespace

double CoverageSample::raw_mean() const {
    if (contained.empty()) return 0.0;
    double s = 0.0;
    for (int c : contained) s += c;
    return s / static_cast<double>(contained.size());
}

std::size_t CoverageReport::outside_count() const {
    std::size_t n = 0;
    for (const auto& p : points) n += p.outside_band;
    return n;
}

std::size_t CoverageReport::undercovered_count() const {
    std::size_t n = 0;
    for (const auto& p : points) n += p.undercovered;
    return n;
}

CoverageSample collect_coverage(const OddsModel& odds, std::span<const double> surface, double alpha,
                                std::size_t b_dd, Rng& rng, std::size_t threads) {
    if (b_dd < 1) throw DomainError("B'' must be at least 1");
    const auto& model = odds.model();
    const std::uint64_t base = rng.next_u64();
    CoverageSample sample;
    sample.theta.resize(b_dd);
    sample.contained.resize(b_dd);
    parallel_for(b_dd, threads, [&](std::size_t i) {
        Rng local(derive_seed(base, i));
        auto theta = prior_draw(model, local);
        const auto data = simulate(model, theta, model.n_obs, local);
        const auto set = confidence_set(odds, surface, data, alpha);
        sample.contained[i] = set.contains(model.params.nearest_index(theta)) ? 1 : 0;
        sample.theta[i] = theta;
    });
    return sample;
}

CoverageReport fit_coverage_curve(const CoverageSample& sample, const ParamSpace& space, double nominal) {
    if (sample.size() == 0 || sample.contained.size() != sample.size())
        throw DomainError("coverage sample is empty or inconsistent");
    if (!(nominal > 0.0 && nominal < 1.0)) throw DomainError("nominal coverage must be in (0, 1)");

    const auto n = static_cast<Eigen::Index>(sample.size());
    const Eigen::Index p = quadratic_features(sample.theta.front(), space).size();
    Eigen::MatrixXd x(n + 2, p);
    Eigen::VectorXd y(n + 2), w(n + 2);
    ParamPoint mean(space.dim(), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& t = sample.theta[static_cast<std::size_t>(i)];
        x.row(i) = quadratic_features(t, space).transpose();
        y(i) = sample.contained[static_cast<std::size_t>(i)];
        w(i) = 1.0;
        for (std::size_t d = 0; d < space.dim(); ++d) mean[d] += t[d] / static_cast<double>(n);
    }
    x.row(n) = quadratic_features(mean, space).transpose();
    x.row(n + 1) = x.row(n);
    y(n) = 1.0;
    y(n + 1) = 0.0;
    w(n) = 0.0;
    w(n + 1) = 0.0;

    auto fit = weighted_logistic(x, y, w, 0.0);
    bool separated = !fit.converged || !fit.beta.allFinite();
    if (!separated) {
        const Eigen::VectorXd eta = x.topRows(n) * fit.beta;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double q = sigmoid(eta(i));
            if (q > 1.0 - kSeparation || q < kSeparation) separated = true;
        }
    }

    CoverageReport report;
    report.nominal = nominal;
    report.n_samples = sample.size();
    if (separated) {
        w(n) = 1.0;
        w(n + 1) = 1.0;
        fit = weighted_logistic(x, y, w, kShrinkRidge);
        report.shrunk = true;
    }

    report.passed = true;
    report.points.reserve(space.grid_size());
    for (const auto& theta : space.grid()) {
        const Eigen::VectorXd f = quadratic_features(theta, space);
        const double eta = f.dot(fit.beta);
        const double q = sigmoid(eta);
        const double var = std::max(0.0, f.dot(fit.covariance * f));
        CoveragePoint pt;
        pt.theta = theta;
        pt.estimate = q;
        pt.se = q * (1.0 - q) * std::sqrt(var);
        pt.undercovered = pt.estimate + 2.0 * pt.se < nominal;
        pt.outside_band = std::abs(pt.estimate - nominal) > 2.0 * pt.se;
        if (pt.outside_band) report.passed = false;
        report.points.push_back(pt);
    }
    return report;
}

} // namespace acore
