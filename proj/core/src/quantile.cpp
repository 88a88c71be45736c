#include "acore/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "acore/error.hpp"
#include "acore/parallel.hpp"

namespace acore {

double empirical_quantile(std::vector<double> values, double alpha) {
    if (values.empty()) throw DomainError("quantile of an empty set");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must be in (0, 1)");
    const auto m = static_cast<double>(values.size());
    auto rank = static_cast<std::size_t>(std::ceil(alpha * m - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
    std::nth_element(values.begin(), nth, values.end());
    return *nth;
}

double pinball_loss(std::span<const double> y, std::span<const double> pred, double alpha) {
    if (y.size() != pred.size() || y.empty()) throw DomainError("pinball loss needs matching non-empty inputs");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - pred[i];
        s += r >= 0.0 ? alpha * r : (alpha - 1.0) * r;
    }
    return s / static_cast<double>(y.size());
}

TauTrainingSet simulate_tau_set(const OddsModel& odds, std::size_t b_prime, NullMode mode, Rng& rng,
                                std::size_t threads, const Box* theta0_region) {
    if (b_prime < 1) throw DomainError("B' must be at least 1");
    const auto& model = odds.model();
    GridSubset null_grid;
    Box draw_region = model.proposal;
    if (mode == NullMode::composite) {
        if (theta0_region == nullptr) throw DomainError("composite mode needs a null region");
        draw_region = *theta0_region;
        null_grid = model.params.subset(draw_region);
    }

    const std::uint64_t base = rng.next_u64();
    TauTrainingSet set;
    set.pairs.resize(b_prime);
    parallel_for(b_prime, threads, [&](std::size_t i) {
        Rng local(derive_seed(base, i));
        auto theta = prior_draw(model, draw_region, local);
        const auto data = simulate(model, theta, model.n_obs, local);
        const double tau = mode == NullMode::composite ? acore_statistic(odds, data, null_grid).tau
                                                       : tau_simple(odds, data, theta);
        set.pairs[i] = {theta, tau};
    });
    return set;
}

std::string_view to_string(QuantileKind kind) noexcept {
    return kind == QuantileKind::boosted_trees ? "boosted_trees" : "knn_quantile";
}

QuantileKind parse_quantile_kind(std::string_view name) {
    if (name == "boosted_trees" || name == "boosted") return QuantileKind::boosted_trees;
    if (name == "knn_quantile" || name == "knn") return QuantileKind::knn_quantile;
    throw ConfigError("unknown quantile regressor '" + std::string(name) + "'");
}

namespace {

struct TreeBuilder {
    const std::vector<ParamPoint>& x;
    const std::vector<double>& target;
    const std::vector<double>& residual;
    const BoostingSpec& spec;
    double alpha;
    std::vector<TreeNode> nodes;

    std::size_t build(std::vector<std::size_t> idx, std::size_t depth) {
        const std::size_t id = nodes.size();
        nodes.emplace_back();

        int best_feature = -1;
        double best_gain = 0.0;
        double best_threshold = 0.0;
        if (depth < spec.max_depth && idx.size() >= 2 * spec.min_leaf) {
            double total = 0.0;
            for (auto i : idx) total += target[i];
            const double n = static_cast<double>(idx.size());
            const double base = total * total / n;
            for (std::size_t f = 0; f < x.front().size(); ++f) {
                std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                    return x[a][f] < x[b][f] || (x[a][f] == x[b][f] && a < b);
                });
                double left = 0.0;
                for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
                    left += target[idx[k]];
                    const std::size_t nl = k + 1;
                    const std::size_t nr = idx.size() - nl;
                    if (nl < spec.min_leaf || nr < spec.min_leaf) continue;
                    const double lo = x[idx[k]][f];
                    const double hi = x[idx[k + 1]][f];
                    if (!(lo < hi)) continue;
                    const double right = total - left;
                    const double gain = left * left / static_cast<double>(nl) +
                                        right * right / static_cast<double>(nr) - base;
                    if (gain > best_gain + 1e-12) {
                        best_gain = gain;
                        best_feature = static_cast<int>(f);
                        best_threshold = 0.5 * (lo + hi);
                    }
                }
            }
        }

        if (best_feature < 0) {
            std::vector<double> r;
            r.reserve(idx.size());
            for (auto i : idx) r.push_back(residual[i]);
            nodes[id].value = empirical_quantile(std::move(r), alpha);
            return id;
        }

        std::vector<std::size_t> left_idx, right_idx;
        for (auto i : idx) (x[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? left_idx : right_idx).push_back(i);
        idx.clear();
        idx.shrink_to_fit();
        nodes[id].feature = best_feature;
        nodes[id].threshold = best_threshold;
        const std::size_t l = build(std::move(left_idx), depth + 1);
        const std::size_t r = build(std::move(right_idx), depth + 1);
        nodes[id].left = l;
        nodes[id].right = r;
        return id;
    }
};

double tree_predict(const std::vector<TreeNode>& nodes, const ParamPoint& theta) {
    std::size_t at = 0;
    while (nodes[at].feature >= 0)
        at = theta[static_cast<std::size_t>(nodes[at].feature)] <= nodes[at].threshold ? nodes[at].left : nodes[at].right;
    return nodes[at].value;
}

std::string hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

std::string token(std::istream& in) {
    std::string t;
    if (!(in >> t)) throw ConfigError("quantile model: unexpected end of input");
    return t;
}

double real_token(std::istream& in) {
    const auto t = token(in);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0') throw ConfigError("quantile model: bad number '" + t + "'");
    return v;
}

std::size_t count_token(std::istream& in) {
    const auto t = token(in);
    char* end = nullptr;
    const auto v = std::strtoull(t.c_str(), &end, 10);
    if (end == t.c_str() || *end != '\0') throw ConfigError("quantile model: bad count '" + t + "'");
    return static_cast<std::size_t>(v);
}

void expect_token(std::istream& in, const char* want) {
    if (token(in) != want) throw ConfigError(std::string("quantile model: expected ") + want);
}

} // namespace

QuantileModel fit_quantile(const TauTrainingSet& train, double alpha, QuantileKind kind, const BoostingSpec& spec) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must be in (0, 1)");
    if (train.size() < 50) throw DomainError("quantile regression needs at least 50 pairs");
    for (const auto& p : train.pairs)
        if (!std::isfinite(p.tau)) throw DomainError("non-finite tau in training set");

    QuantileModel qm;
    qm.kind_ = kind;
    qm.alpha_ = alpha;
    const std::size_t n = train.size();
    std::vector<ParamPoint> x(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = train.pairs[i].theta;
        y[i] = train.pairs[i].tau;
    }

    if (kind == QuantileKind::knn_quantile) {
        std::size_t k = spec.neighbours;
        if (k == 0) k = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
        qm.neighbours_ = std::clamp<std::size_t>(k, 1, n);
        const std::size_t dim = x.front().size();
        qm.axis_scale_.assign(dim, 1.0);
        for (std::size_t d = 0; d < dim; ++d) {
            const auto [lo, hi] = std::minmax_element(x.begin(), x.end(),
                                                      [d](const ParamPoint& a, const ParamPoint& b) { return a[d] < b[d]; });
            const double width = (*hi)[d] - (*lo)[d];
            if (width > 0.0) qm.axis_scale_[d] = width;
        }
        qm.thetas_ = std::move(x);
        qm.taus_ = std::move(y);
        return qm;
    }

    if (spec.trees < 1 || spec.max_depth < 1 || !(spec.learning_rate > 0.0) || spec.min_leaf < 1)
        throw DomainError("invalid boosting configuration");
    qm.learning_rate_ = spec.learning_rate;
    qm.init_ = empirical_quantile(y, alpha);
    std::vector<double> pred(n, qm.init_);
    std::vector<double> residual(n), gradient(n);
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (std::size_t t = 0; t < spec.trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            residual[i] = y[i] - pred[i];
            gradient[i] = residual[i] > 0.0 ? alpha : alpha - 1.0;
        }
        TreeBuilder builder{x, gradient, residual, spec, alpha, {}};
        builder.build(all, 0);
        for (std::size_t i = 0; i < n; ++i) pred[i] += spec.learning_rate * tree_predict(builder.nodes, x[i]);
        qm.trees_.push_back(std::move(builder.nodes));
    }
    return qm;
}

double QuantileModel::predict(const ParamPoint& theta) const {
    if (kind_ == QuantileKind::boosted_trees) {
        double s = init_;
        for (const auto& tree : trees_) s += learning_rate_ * tree_predict(tree, theta);
        return s;
    }
    std::vector<std::pair<double, std::size_t>> dist(thetas_.size());
    for (std::size_t i = 0; i < thetas_.size(); ++i) {
        double s = 0.0;
        for (std::size_t d = 0; d < theta.size(); ++d) {
            const double diff = (thetas_[i][d] - theta[d]) / axis_scale_[d];
            s += diff * diff;
        }
        dist[i] = {s, i};
    }
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(neighbours_ - 1), dist.end());
    std::vector<double> near(neighbours_);
    for (std::size_t i = 0; i < neighbours_; ++i) near[i] = taus_[dist[i].second];
    return empirical_quantile(std::move(near), alpha_);
}

void QuantileModel::save(std::ostream& out) const {
    out << "acore-quantile-model 1\n";
    out << "kind " << to_string(kind_) << "\nalpha " << hex(alpha_) << '\n';
    if (kind_ == QuantileKind::boosted_trees) {
        out << "init " << hex(init_) << "\nrate " << hex(learning_rate_) << "\ntrees " << trees_.size() << '\n';
        for (const auto& tree : trees_) {
            out << "tree " << tree.size() << '\n';
            for (const auto& node : tree)
                out << node.feature << ' ' << hex(node.threshold) << ' ' << hex(node.value) << ' ' << node.left << ' '
                    << node.right << '\n';
        }
        return;
    }
    const std::size_t dim = axis_scale_.size();
    out << "k " << neighbours_ << "\ndim " << dim << "\nscale";
    for (double s : axis_scale_) out << ' ' << hex(s);
    out << "\npairs " << thetas_.size() << '\n';
    for (std::size_t i = 0; i < thetas_.size(); ++i) {
        for (std::size_t d = 0; d < dim; ++d) out << hex(thetas_[i][d]) << ' ';
        out << hex(taus_[i]) << '\n';
    }
}

QuantileModel QuantileModel::load(std::istream& in) {
    expect_token(in, "acore-quantile-model");
    if (token(in) != "1") throw ConfigError("unsupported quantile model version");
    QuantileModel qm;
    expect_token(in, "kind");
    qm.kind_ = parse_quantile_kind(token(in));
    expect_token(in, "alpha");
    qm.alpha_ = real_token(in);
    if (qm.kind_ == QuantileKind::boosted_trees) {
        expect_token(in, "init");
        qm.init_ = real_token(in);
        expect_token(in, "rate");
        qm.learning_rate_ = real_token(in);
        expect_token(in, "trees");
        qm.trees_.resize(count_token(in));
        for (auto& tree : qm.trees_) {
            expect_token(in, "tree");
            tree.resize(count_token(in));
            for (auto& node : tree) {
                node.feature = std::stoi(token(in));
                node.threshold = real_token(in);
                node.value = real_token(in);
                node.left = count_token(in);
                node.right = count_token(in);
                if (node.feature >= static_cast<int>(kMaxDim) || (node.feature >= 0 && (node.left >= tree.size() || node.right >= tree.size())))
                    throw ConfigError("quantile model: malformed tree");
            }
        }
        return qm;
    }
    expect_token(in, "k");
    qm.neighbours_ = count_token(in);
    expect_token(in, "dim");
    const auto dim = count_token(in);
    if (dim < 1 || dim > kMaxDim) throw ConfigError("quantile model: bad dimension");
    expect_token(in, "scale");
    qm.axis_scale_.resize(dim);
    for (auto& s : qm.axis_scale_) s = real_token(in);
    expect_token(in, "pairs");
    const auto n = count_token(in);
    qm.thetas_.assign(n, ParamPoint(dim, 0.0));
    qm.taus_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dim; ++d) qm.thetas_[i][d] = real_token(in);
        qm.taus_[i] = real_token(in);
    }
    if (qm.neighbours_ < 1 || qm.neighbours_ > n) throw ConfigError("quantile model: bad neighbour count");
    return qm;
}

double critical_value_composite(const QuantileModel& qm, const ParamSpace& space, const GridSubset& theta0_region) {
    if (theta0_region.empty()) throw DomainError("null region is empty");
    double best = qm.predict(space.grid_point(theta0_region.front()));
    for (std::size_t idx : theta0_region) best = std::min(best, qm.predict(space.grid_point(idx)));
    return best;
}

std::vector<double> critical_surface(const QuantileModel& qm, const ParamSpace& space) {
    std::vector<double> out(space.grid_size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = qm.predict(space.grid_point(j));
    return out;
}

} // namespace acore
