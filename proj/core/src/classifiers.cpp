#include "acore/classifiers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "acore/error.hpp"

namespace acore {

namespace {

constexpr std::size_t kMaxFeatures = 2 * kMaxDim;
using FeatureVec = std::array<double, kMaxFeatures>;

// ---------------------------------------------------------------------------
// Serialization helpers

void put(std::ostream& out, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    out << buf;
}

void put_vector(std::ostream& out, std::span<const double> v) {
    out << v.size();
    for (double x : v) {
        out << ' ';
        put(out, x);
    }
    out << '\n';
}

std::string next_token(std::istream& in) {
    std::string tok;
    if (!(in >> tok)) throw ConfigError("unexpected end of serialized model");
    return tok;
}

void expect(std::istream& in, const std::string& want) {
    const auto tok = next_token(in);
    if (tok != want) throw ConfigError("serialized model: expected '" + want + "', found '" + tok + "'");
}

double read_double(std::istream& in) {
    const auto tok = next_token(in);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw ConfigError("serialized model: bad number '" + tok + "'");
    return v;
}

std::size_t read_size(std::istream& in) {
    const auto tok = next_token(in);
    char* end = nullptr;
    const auto v = std::strtoull(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0') throw ConfigError("serialized model: bad count '" + tok + "'");
    return static_cast<std::size_t>(v);
}

std::vector<double> read_vector(std::istream& in) {
    const auto n = read_size(in);
    std::vector<double> v(n);
    for (auto& x : v) x = read_double(in);
    return v;
}

// ---------------------------------------------------------------------------
// Feature handling shared by every classifier

struct FeatureLayout {
    std::size_t param_dim = 0;
    std::size_t data_dim = 0;
    Standardizer standardizer;

    std::size_t dim() const noexcept { return param_dim + data_dim; }

    FeatureVec features(const ParamPoint& theta, const Observation& x) const noexcept {
        FeatureVec f{};
        for (std::size_t d = 0; d < param_dim; ++d) f[d] = standardizer.apply(d, theta[d]);
        for (std::size_t d = 0; d < data_dim; ++d)
            f[param_dim + d] = standardizer.apply(param_dim + d, x[d]);
        return f;
    }

    void save(std::ostream& out) const {
        out << "layout " << param_dim << ' ' << data_dim << '\n';
        out << "mean ";
        put_vector(out, standardizer.mean);
        out << "scale ";
        put_vector(out, standardizer.scale);
    }

    static FeatureLayout load(std::istream& in) {
        FeatureLayout l;
        expect(in, "layout");
        l.param_dim = read_size(in);
        l.data_dim = read_size(in);
        expect(in, "mean");
        l.standardizer.mean = read_vector(in);
        expect(in, "scale");
        l.standardizer.scale = read_vector(in);
        if (l.param_dim > kMaxDim || l.data_dim > kMaxDim || l.standardizer.mean.size() != l.dim() ||
            l.standardizer.scale.size() != l.dim())
            throw ConfigError("serialized model: inconsistent feature layout");
        return l;
    }
};

struct TrainingMatrix {
    FeatureLayout layout;
    Eigen::MatrixXd z; // standardized features, one row per example
    Eigen::VectorXd y;
};

TrainingMatrix build_training_matrix(const LabeledSet& sample) {
    if (sample.empty()) throw TrainingError("empty training sample");
    const std::size_t positives = sample.count_positive();
    if (positives == 0 || positives == sample.size())
        throw TrainingError("training sample must contain both labels");

    TrainingMatrix tm;
    tm.layout.param_dim = sample.examples.front().theta.size();
    tm.layout.data_dim = sample.examples.front().x.size();
    const std::size_t dim = tm.layout.dim();
    const std::size_t n = sample.size();

    std::vector<double> rows(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& e = sample.examples[i];
        for (std::size_t d = 0; d < tm.layout.param_dim; ++d) rows[i * dim + d] = e.theta[d];
        for (std::size_t d = 0; d < tm.layout.data_dim; ++d)
            rows[i * dim + tm.layout.param_dim + d] = e.x[d];
    }
    tm.layout.standardizer.fit(rows, dim);

    tm.z.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    tm.y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dim; ++d)
            tm.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
                tm.layout.standardizer.apply(d, rows[i * dim + d]);
        tm.y(static_cast<Eigen::Index>(i)) = sample.examples[i].y;
    }
    return tm;
}

double sigmoid(double s) noexcept { return 1.0 / (1.0 + std::exp(-s)); }

// log(1 + exp(s)) without overflow.
double softplus(double s) noexcept { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

// ---------------------------------------------------------------------------
// Logistic regression

class LogisticClassifier final : public Classifier {
public:
    LogisticClassifier(FeatureLayout layout, std::vector<double> coef)
        : layout_(std::move(layout)), coef_(std::move(coef)) {}

    static std::unique_ptr<Classifier> fit(const ClassifierSpec& spec, const LabeledSet& sample) {
        auto tm = build_training_matrix(sample);
        const Eigen::Index n = tm.z.rows();
        const Eigen::Index p = tm.z.cols() + 1;
        Eigen::MatrixXd x(n, p);
        x.col(0).setOnes();
        x.rightCols(p - 1) = tm.z;

        Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
        const auto mean_nll = [&](const Eigen::VectorXd& b) {
            const Eigen::VectorXd eta = x * b;
            double s = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) s += softplus(eta(i)) - tm.y(i) * eta(i);
            return s / static_cast<double>(n);
        };

        double loss = mean_nll(beta);
        for (std::size_t iter = 0; iter < spec.max_iterations; ++iter) {
            const Eigen::VectorXd eta = x * beta;
            Eigen::VectorXd prob(n), w(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                prob(i) = sigmoid(eta(i));
                w(i) = prob(i) * (1.0 - prob(i));
            }
            const Eigen::VectorXd grad = x.transpose() * (tm.y - prob) / static_cast<double>(n);
            if (grad.lpNorm<Eigen::Infinity>() < spec.gradient_tolerance) break;

            Eigen::MatrixXd hess = x.transpose() * w.asDiagonal() * x / static_cast<double>(n);
            // Constant feature columns make the Hessian singular; a vanishing ridge
            // on the slopes keeps their coefficients at zero.
            for (Eigen::Index j = 1; j < p; ++j) hess(j, j) += 1e-12;
            const Eigen::VectorXd step = hess.ldlt().solve(grad);

            double scale = 1.0;
            Eigen::VectorXd candidate = beta + step;
            double cand_loss = mean_nll(candidate);
            while (cand_loss > loss && scale > 1e-6) {
                scale *= 0.5;
                candidate = beta + scale * step;
                cand_loss = mean_nll(candidate);
            }
            if (!(cand_loss <= loss)) break;
            beta = candidate;
            loss = cand_loss;
        }
        return std::make_unique<LogisticClassifier>(tm.layout,
                                                    std::vector<double>(beta.data(), beta.data() + p));
    }

    static std::unique_ptr<Classifier> load(std::istream& in) {
        auto layout = FeatureLayout::load(in);
        expect(in, "coef");
        auto coef = read_vector(in);
        if (coef.size() != layout.dim() + 1) throw ConfigError("serialized logistic: bad coefficient count");
        return std::make_unique<LogisticClassifier>(std::move(layout), std::move(coef));
    }

    ClassifierKind kind() const noexcept override { return ClassifierKind::logistic; }
    std::size_t param_dim() const noexcept override { return layout_.param_dim; }
    std::size_t data_dim() const noexcept override { return layout_.data_dim; }

    double logit(const ParamPoint& theta, const Observation& x) const override {
        const auto f = layout_.features(theta, x);
        double s = coef_[0];
        for (std::size_t d = 0; d < layout_.dim(); ++d) s += coef_[d + 1] * f[d];
        return s;
    }

    void save(std::ostream& out) const override {
        out << "classifier logistic\n";
        layout_.save(out);
        out << "coef ";
        put_vector(out, coef_);
    }

private:
    FeatureLayout layout_;
    std::vector<double> coef_;
};

// ---------------------------------------------------------------------------
// Quadratic discriminant analysis

struct GaussianClass {
    std::vector<double> mean;
    std::vector<double> precision; // row-major dim x dim
    double log_det = 0.0;
    double log_prior = 0.0;

    double log_density(const FeatureVec& z, std::size_t dim) const noexcept {
        FeatureVec c{};
        for (std::size_t d = 0; d < dim; ++d) c[d] = z[d] - mean[d];
        double q = 0.0;
        for (std::size_t a = 0; a < dim; ++a) {
            double row = 0.0;
            for (std::size_t b = 0; b < dim; ++b) row += precision[a * dim + b] * c[b];
            q += c[a] * row;
        }
        return log_prior - 0.5 * (q + log_det);
    }
};

class QdaClassifier final : public Classifier {
public:
    QdaClassifier(FeatureLayout layout, GaussianClass neg, GaussianClass pos)
        : layout_(std::move(layout)), neg_(std::move(neg)), pos_(std::move(pos)) {}

    static std::unique_ptr<Classifier> fit(const ClassifierSpec& spec, const LabeledSet& sample) {
        auto tm = build_training_matrix(sample);
        const Eigen::Index n = tm.z.rows();
        const Eigen::Index dim = tm.z.cols();

        const auto fit_class = [&](int label) {
            std::vector<Eigen::Index> rows;
            for (Eigen::Index i = 0; i < n; ++i)
                if (static_cast<int>(tm.y(i)) == label) rows.push_back(i);
            if (rows.size() < 2) throw TrainingError("QDA needs at least two examples per class");

            Eigen::VectorXd mu = Eigen::VectorXd::Zero(dim);
            for (auto i : rows) mu += tm.z.row(i).transpose();
            mu /= static_cast<double>(rows.size());
            Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
            for (auto i : rows) {
                const Eigen::VectorXd c = tm.z.row(i).transpose() - mu;
                cov += c * c.transpose();
            }
            cov /= static_cast<double>(rows.size() - 1);
            const double loading = spec.covariance_loading * cov.trace() / static_cast<double>(dim);
            cov.diagonal().array() += loading;

            Eigen::LLT<Eigen::MatrixXd> llt(cov);
            if (llt.info() != Eigen::Success) throw TrainingError("QDA class covariance is not positive definite");
            const Eigen::MatrixXd prec = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
            double log_det = 0.0;
            for (Eigen::Index d = 0; d < dim; ++d) log_det += 2.0 * std::log(llt.matrixL()(d, d));

            GaussianClass g;
            g.mean.assign(mu.data(), mu.data() + dim);
            g.precision.resize(static_cast<std::size_t>(dim * dim));
            for (Eigen::Index a = 0; a < dim; ++a)
                for (Eigen::Index b = 0; b < dim; ++b) g.precision[static_cast<std::size_t>(a * dim + b)] = prec(a, b);
            g.log_det = log_det;
            g.log_prior = std::log(static_cast<double>(rows.size()) / static_cast<double>(n));
            return g;
        };

        auto neg = fit_class(0);
        auto pos = fit_class(1);
        return std::make_unique<QdaClassifier>(tm.layout, std::move(neg), std::move(pos));
    }

    static std::unique_ptr<Classifier> load(std::istream& in) {
        auto layout = FeatureLayout::load(in);
        const auto read_class = [&](const char* tag) {
            expect(in, tag);
            GaussianClass g;
            g.mean = read_vector(in);
            g.precision = read_vector(in);
            g.log_det = read_double(in);
            g.log_prior = read_double(in);
            if (g.mean.size() != layout.dim() || g.precision.size() != layout.dim() * layout.dim())
                throw ConfigError("serialized qda: bad class dimensions");
            return g;
        };
        auto neg = read_class("class0");
        auto pos = read_class("class1");
        return std::make_unique<QdaClassifier>(std::move(layout), std::move(neg), std::move(pos));
    }

    ClassifierKind kind() const noexcept override { return ClassifierKind::qda; }
    std::size_t param_dim() const noexcept override { return layout_.param_dim; }
    std::size_t data_dim() const noexcept override { return layout_.data_dim; }

    double logit(const ParamPoint& theta, const Observation& x) const override {
        const auto z = layout_.features(theta, x);
        return pos_.log_density(z, layout_.dim()) - neg_.log_density(z, layout_.dim());
    }

    void save(std::ostream& out) const override {
        out << "classifier qda\n";
        layout_.save(out);
        const auto write_class = [&](const char* tag, const GaussianClass& g) {
            out << tag << ' ';
            put_vector(out, g.mean);
            put_vector(out, g.precision);
            put(out, g.log_det);
            out << ' ';
            put(out, g.log_prior);
            out << '\n';
        };
        write_class("class0", neg_);
        write_class("class1", pos_);
    }

private:
    FeatureLayout layout_;
    GaussianClass neg_;
    GaussianClass pos_;
};

// ---------------------------------------------------------------------------
// k nearest neighbours

class KnnClassifier final : public Classifier {
public:
    KnnClassifier(FeatureLayout layout, std::vector<double> points, std::vector<int> labels, std::size_t k)
        : layout_(std::move(layout)), points_(std::move(points)), labels_(std::move(labels)), k_(k) {}

    static std::unique_ptr<Classifier> fit(const ClassifierSpec& spec, const LabeledSet& sample) {
        auto tm = build_training_matrix(sample);
        const std::size_t n = static_cast<std::size_t>(tm.z.rows());
        const std::size_t dim = tm.layout.dim();
        std::size_t k = spec.neighbours;
        if (k == 0) k = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
        k = std::clamp<std::size_t>(k, 1, n);

        std::vector<double> points(n * dim);
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < dim; ++d)
                points[i * dim + d] = tm.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d));
            labels[i] = static_cast<int>(tm.y(static_cast<Eigen::Index>(i)));
        }
        return std::make_unique<KnnClassifier>(tm.layout, std::move(points), std::move(labels), k);
    }

    static std::unique_ptr<Classifier> load(std::istream& in) {
        auto layout = FeatureLayout::load(in);
        expect(in, "k");
        const auto k = read_size(in);
        expect(in, "points");
        auto points = read_vector(in);
        expect(in, "labels");
        const auto n = read_size(in);
        std::vector<int> labels(n);
        for (auto& l : labels) l = static_cast<int>(read_size(in));
        if (points.size() != n * layout.dim() || k < 1 || k > n)
            throw ConfigError("serialized knn: inconsistent sizes");
        return std::make_unique<KnnClassifier>(std::move(layout), std::move(points), std::move(labels), k);
    }

    ClassifierKind kind() const noexcept override { return ClassifierKind::knn; }
    std::size_t param_dim() const noexcept override { return layout_.param_dim; }
    std::size_t data_dim() const noexcept override { return layout_.data_dim; }

    double probability(const ParamPoint& theta, const Observation& x) const {
        const auto z = layout_.features(theta, x);
        const std::size_t dim = layout_.dim();
        const std::size_t n = labels_.size();
        thread_local std::vector<std::pair<double, std::size_t>> dist;
        dist.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = points_[i * dim + d] - z[d];
                s += diff * diff;
            }
            dist[i] = {s, i};
        }
        std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_ - 1), dist.end());
        std::size_t positives = 0;
        for (std::size_t i = 0; i < k_; ++i) positives += labels_[dist[i].second] == 1;
        return static_cast<double>(positives) / static_cast<double>(k_);
    }

    double logit(const ParamPoint& theta, const Observation& x) const override {
        const double p = probability(theta, x);
        return std::log(p) - std::log1p(-p);
    }

    void save(std::ostream& out) const override {
        out << "classifier knn\n";
        layout_.save(out);
        out << "k " << k_ << '\n';
        out << "points ";
        put_vector(out, points_);
        out << "labels " << labels_.size();
        for (int l : labels_) out << ' ' << l;
        out << '\n';
    }

    std::size_t neighbours() const noexcept { return k_; }

private:
    FeatureLayout layout_;
    std::vector<double> points_;
    std::vector<int> labels_;
    std::size_t k_;
};

// ---------------------------------------------------------------------------
// Multi-layer perceptron: one ReLU hidden layer, logistic output.

struct MlpWeights {
    Eigen::MatrixXd w1; // hidden x input
    Eigen::VectorXd b1;
    Eigen::VectorXd w2; // hidden
    double b2 = 0.0;
};

struct AdamState {
    Eigen::MatrixXd m_w1, v_w1;
    Eigen::VectorXd m_b1, v_b1, m_w2, v_w2;
    double m_b2 = 0.0, v_b2 = 0.0;
    std::size_t t = 0;
};

class MlpClassifier final : public Classifier {
public:
    MlpClassifier(FeatureLayout layout, MlpWeights w) : layout_(std::move(layout)), w_(std::move(w)) {}

    static std::unique_ptr<Classifier> fit(const ClassifierSpec& spec, const LabeledSet& sample, Rng& rng) {
        auto tm = build_training_matrix(sample);
        const Eigen::Index n = tm.z.rows();
        const Eigen::Index dim = tm.z.cols();
        const Eigen::Index hidden = static_cast<Eigen::Index>(spec.hidden_units);

        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::shuffle(order.begin(), order.end(), rng.engine());

        Eigen::Index n_val = 0;
        if (spec.validation_fraction > 0.0) {
            n_val = static_cast<Eigen::Index>(std::llround(spec.validation_fraction * static_cast<double>(n)));
            n_val = std::clamp<Eigen::Index>(n_val, 1, n - 1);
        }
        std::vector<Eigen::Index> val(order.begin(), order.begin() + n_val);
        std::vector<Eigen::Index> train(order.begin() + n_val, order.end());

        // Glorot-uniform initialization for ReLU layers.
        MlpWeights w;
        const auto init = [&](Eigen::Index fan_in, Eigen::Index fan_out, Eigen::Index rows, Eigen::Index cols) {
            const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            Eigen::MatrixXd m(rows, cols);
            for (Eigen::Index c = 0; c < cols; ++c)
                for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(-bound, bound);
            return m;
        };
        w.w1 = init(dim, hidden, hidden, dim);
        w.b1 = init(dim, hidden, hidden, 1).col(0);
        w.w2 = init(hidden, 1, hidden, 1).col(0);
        w.b2 = init(hidden, 1, 1, 1)(0, 0);

        AdamState adam;
        adam.m_w1 = Eigen::MatrixXd::Zero(hidden, dim);
        adam.v_w1 = adam.m_w1;
        adam.m_b1 = Eigen::VectorXd::Zero(hidden);
        adam.v_b1 = adam.m_b1;
        adam.m_w2 = Eigen::VectorXd::Zero(hidden);
        adam.v_w2 = adam.m_w2;

        const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
        const std::size_t batch = std::min<std::size_t>(spec.batch_size, train.size());
        const double penalty = spec.weight_penalty;

        const auto mean_loss = [&](const MlpWeights& m, const std::vector<Eigen::Index>& rows) {
            double s = 0.0;
            for (auto i : rows) {
                const Eigen::VectorXd a = (m.w1 * tm.z.row(i).transpose() + m.b1).cwiseMax(0.0);
                const double logit = a.dot(m.w2) + m.b2;
                s += softplus(logit) - tm.y(i) * logit;
            }
            return s / static_cast<double>(rows.size());
        };

        MlpWeights best = w;
        double best_loss = std::numeric_limits<double>::infinity();
        std::size_t stale = 0;

        Eigen::MatrixXd zb, act, dh;
        Eigen::VectorXd yb, delta;
        for (std::size_t epoch = 0; epoch < spec.max_epochs; ++epoch) {
            std::shuffle(train.begin(), train.end(), rng.engine());
            for (std::size_t start = 0; start < train.size(); start += batch) {
                const std::size_t stop = std::min(start + batch, train.size());
                const Eigen::Index m = static_cast<Eigen::Index>(stop - start);
                zb.resize(m, dim);
                yb.resize(m);
                for (Eigen::Index r = 0; r < m; ++r) {
                    zb.row(r) = tm.z.row(train[start + static_cast<std::size_t>(r)]);
                    yb(r) = tm.y(train[start + static_cast<std::size_t>(r)]);
                }
                Eigen::MatrixXd pre = zb * w.w1.transpose();
                pre.rowwise() += w.b1.transpose();
                act = pre.cwiseMax(0.0);
                delta = act * w.w2;
                for (Eigen::Index r = 0; r < m; ++r) delta(r) = (sigmoid(delta(r) + w.b2) - yb(r)) / static_cast<double>(m);

                const Eigen::VectorXd g_w2 = act.transpose() * delta + penalty / static_cast<double>(m) * w.w2;
                const double g_b2 = delta.sum();
                dh = delta * w.w2.transpose();
                dh.array() *= (pre.array() > 0.0).cast<double>();
                const Eigen::MatrixXd g_w1 = dh.transpose() * zb + penalty / static_cast<double>(m) * w.w1;
                const Eigen::VectorXd g_b1 = dh.colwise().sum().transpose();

                ++adam.t;
                const double lr = spec.learning_rate * std::sqrt(1.0 - std::pow(beta2, static_cast<double>(adam.t))) /
                                  (1.0 - std::pow(beta1, static_cast<double>(adam.t)));
                const auto step_matrix = [&](auto& param, auto& mom, auto& vel, const auto& grad) {
                    mom = beta1 * mom + (1.0 - beta1) * grad;
                    vel = beta2 * vel + (1.0 - beta2) * grad.cwiseProduct(grad);
                    param.array() -= lr * mom.array() / (vel.array().sqrt() + eps);
                };
                step_matrix(w.w1, adam.m_w1, adam.v_w1, g_w1);
                step_matrix(w.b1, adam.m_b1, adam.v_b1, g_b1);
                step_matrix(w.w2, adam.m_w2, adam.v_w2, g_w2);
                adam.m_b2 = beta1 * adam.m_b2 + (1.0 - beta1) * g_b2;
                adam.v_b2 = beta2 * adam.v_b2 + (1.0 - beta2) * g_b2 * g_b2;
                w.b2 -= lr * adam.m_b2 / (std::sqrt(adam.v_b2) + eps);
            }

            const double loss = mean_loss(w, n_val > 0 ? val : train);
            stale = loss < best_loss - spec.tolerance ? 0 : stale + 1;
            if (loss < best_loss) {
                best_loss = loss;
                best = w;
            }
            if (stale >= spec.patience) break;
        }
        return std::make_unique<MlpClassifier>(tm.layout, std::move(best));
    }

    static std::unique_ptr<Classifier> load(std::istream& in) {
        auto layout = FeatureLayout::load(in);
        expect(in, "hidden");
        const auto hidden = static_cast<Eigen::Index>(read_size(in));
        const auto dim = static_cast<Eigen::Index>(layout.dim());
        MlpWeights w;
        expect(in, "w1");
        const auto w1 = read_vector(in);
        expect(in, "b1");
        const auto b1 = read_vector(in);
        expect(in, "w2");
        const auto w2 = read_vector(in);
        expect(in, "b2");
        w.b2 = read_double(in);
        if (static_cast<Eigen::Index>(w1.size()) != hidden * dim || static_cast<Eigen::Index>(b1.size()) != hidden ||
            static_cast<Eigen::Index>(w2.size()) != hidden)
            throw ConfigError("serialized mlp: inconsistent sizes");
        w.w1.resize(hidden, dim);
        for (Eigen::Index r = 0; r < hidden; ++r)
            for (Eigen::Index c = 0; c < dim; ++c) w.w1(r, c) = w1[static_cast<std::size_t>(r * dim + c)];
        w.b1 = Eigen::Map<const Eigen::VectorXd>(b1.data(), hidden);
        w.w2 = Eigen::Map<const Eigen::VectorXd>(w2.data(), hidden);
        return std::make_unique<MlpClassifier>(std::move(layout), std::move(w));
    }

    ClassifierKind kind() const noexcept override { return ClassifierKind::mlp; }
    std::size_t param_dim() const noexcept override { return layout_.param_dim; }
    std::size_t data_dim() const noexcept override { return layout_.data_dim; }

    double logit(const ParamPoint& theta, const Observation& x) const override {
        const auto z = layout_.features(theta, x);
        const Eigen::Index hidden = w_.w1.rows();
        double s = w_.b2;
        for (Eigen::Index h = 0; h < hidden; ++h) {
            double a = w_.b1(h);
            for (std::size_t d = 0; d < layout_.dim(); ++d) a += w_.w1(h, static_cast<Eigen::Index>(d)) * z[d];
            if (a > 0.0) s += w_.w2(h) * a;
        }
        return s;
    }

    // The hidden pre-activation splits into a theta part and an x part, so each
    // is computed once per grid point / observation.
    void logit_grid(std::span<const ParamPoint> thetas, std::span<const Observation> xs,
                    std::span<double> out) const override {
        const std::size_t hidden = static_cast<std::size_t>(w_.w1.rows());
        const std::size_t pd = layout_.param_dim;
        const std::size_t dd = layout_.data_dim;
        std::vector<double> theta_part(thetas.size() * hidden);
        std::vector<double> x_part(xs.size() * hidden);
        for (std::size_t j = 0; j < thetas.size(); ++j) {
            for (std::size_t h = 0; h < hidden; ++h) {
                double a = w_.b1(static_cast<Eigen::Index>(h));
                for (std::size_t d = 0; d < pd; ++d)
                    a += w_.w1(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(d)) *
                         layout_.standardizer.apply(d, thetas[j][d]);
                theta_part[j * hidden + h] = a;
            }
        }
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (std::size_t h = 0; h < hidden; ++h) {
                double a = 0.0;
                for (std::size_t d = 0; d < dd; ++d)
                    a += w_.w1(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(pd + d)) *
                         layout_.standardizer.apply(pd + d, xs[i][d]);
                x_part[i * hidden + h] = a;
            }
        }
        const double* w2 = w_.w2.data();
        for (std::size_t j = 0; j < thetas.size(); ++j) {
            const double* tp = &theta_part[j * hidden];
            for (std::size_t i = 0; i < xs.size(); ++i) {
                const double* xp = &x_part[i * hidden];
                double s = 0.0;
                for (std::size_t h = 0; h < hidden; ++h) s += w2[h] * std::max(0.0, tp[h] + xp[h]);
                out[j * xs.size() + i] = s + w_.b2;
            }
        }
    }

    void save(std::ostream& out) const override {
        out << "classifier mlp\n";
        layout_.save(out);
        const Eigen::Index hidden = w_.w1.rows();
        const Eigen::Index dim = w_.w1.cols();
        out << "hidden " << hidden << '\n';
        std::vector<double> w1(static_cast<std::size_t>(hidden * dim));
        for (Eigen::Index r = 0; r < hidden; ++r)
            for (Eigen::Index c = 0; c < dim; ++c) w1[static_cast<std::size_t>(r * dim + c)] = w_.w1(r, c);
        out << "w1 ";
        put_vector(out, w1);
        out << "b1 ";
        put_vector(out, std::span<const double>(w_.b1.data(), static_cast<std::size_t>(hidden)));
        out << "w2 ";
        put_vector(out, std::span<const double>(w_.w2.data(), static_cast<std::size_t>(hidden)));
        out << "b2 ";
        put(out, w_.b2);
        out << '\n';
    }

private:
    FeatureLayout layout_;
    MlpWeights w_;
};

} // namespace

std::string_view to_string(ClassifierKind kind) noexcept {
    switch (kind) {
    case ClassifierKind::logistic: return "logistic";
    case ClassifierKind::qda: return "qda";
    case ClassifierKind::knn: return "knn";
    case ClassifierKind::mlp: return "mlp";
    }
    return "unknown";
}

ClassifierKind parse_classifier_kind(std::string_view name) {
    if (name == "logistic") return ClassifierKind::logistic;
    if (name == "qda") return ClassifierKind::qda;
    if (name == "knn" || name == "nn") return ClassifierKind::knn;
    if (name == "mlp") return ClassifierKind::mlp;
    throw ConfigError("unknown classifier '" + std::string(name) + "'");
}

void ClassifierSpec::validate() const {
    if (hidden_units < 1 || hidden_units > 4096) throw DomainError("mlp hidden_units must be in [1, 4096]");
    if (!(learning_rate > 0.0)) throw DomainError("mlp learning_rate must be positive");
    if (max_epochs < 1 || batch_size < 1) throw DomainError("mlp epochs and batch size must be positive");
    if (!(validation_fraction >= 0.0 && validation_fraction < 0.5))
        throw DomainError("mlp validation_fraction must be in [0, 0.5)");
    if (weight_penalty < 0.0) throw DomainError("mlp weight_penalty must be non-negative");
    if (!(covariance_loading >= 0.0)) throw DomainError("qda covariance loading must be non-negative");
    if (!(gradient_tolerance > 0.0) || max_iterations < 1)
        throw DomainError("logistic tolerance and iteration limit must be positive");
}

void Standardizer::fit(std::span<const double> rows, std::size_t dim) {
    const std::size_t n = rows.size() / dim;
    mean.assign(dim, 0.0);
    scale.assign(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < dim; ++d) mean[d] += rows[i * dim + d];
    for (auto& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < dim; ++d) {
            const double c = rows[i * dim + d] - mean[d];
            scale[d] += c * c;
        }
    for (auto& s : scale) {
        s = std::sqrt(s / static_cast<double>(n));
        if (!(s > 0.0)) s = 1.0;
    }
}

void Classifier::logit_grid(std::span<const ParamPoint> thetas, std::span<const Observation> xs,
                            std::span<double> out) const {
    for (std::size_t j = 0; j < thetas.size(); ++j)
        for (std::size_t i = 0; i < xs.size(); ++i) out[j * xs.size() + i] = logit(thetas[j], xs[i]);
}

std::unique_ptr<Classifier> fit_classifier(const ClassifierSpec& spec, const LabeledSet& sample, Rng& rng) {
    spec.validate();
    switch (spec.kind) {
    case ClassifierKind::logistic: return LogisticClassifier::fit(spec, sample);
    case ClassifierKind::qda: return QdaClassifier::fit(spec, sample);
    case ClassifierKind::knn: return KnnClassifier::fit(spec, sample);
    case ClassifierKind::mlp: return MlpClassifier::fit(spec, sample, rng);
    }
    throw DomainError("unknown classifier kind");
}

std::unique_ptr<Classifier> load_classifier(std::istream& in) {
    expect(in, "classifier");
    const auto kind = parse_classifier_kind(next_token(in));
    switch (kind) {
    case ClassifierKind::logistic: return LogisticClassifier::load(in);
    case ClassifierKind::qda: return QdaClassifier::load(in);
    case ClassifierKind::knn: return KnnClassifier::load(in);
    case ClassifierKind::mlp: return MlpClassifier::load(in);
    }
    throw ConfigError("unknown classifier kind");
}

} // namespace acore
