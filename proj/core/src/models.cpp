#include "acore/models.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "acore/config.hpp"
#include "acore/error.hpp"

namespace acore {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double poisson_logpmf(double x, double mean) {
    if (x < 0.0) return kNegInf;
    return x * std::log(mean) - mean - std::lgamma(x + 1.0);
}

double normal_logpdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return -0.5 * z * z - std::log(sd) - kHalfLog2Pi;
}

// log(1/2 N(x;-t,1) + 1/2 N(x;t,1)) as max + log1p(exp(-|a-b|)) - log 2.
double gmm_logpdf(double x, double t) {
    const double cross = std::abs(x * t);
    return -0.5 * (x * x + t * t) + cross + std::log1p(std::exp(-2.0 * cross)) -
           std::numbers::ln2 - kHalfLog2Pi;
}

void check_theta(const ModelSpec& model, const ParamPoint& theta) {
    model.params.require_contains(theta);
}

} // namespace

std::string_view to_string(ModelKind kind) noexcept {
    switch (kind) {
    case ModelKind::poisson_counting: return "poisson_counting";
    case ModelKind::gmm: return "gmm";
    case ModelKind::signal_background: return "signal_background";
    case ModelKind::gaussian_mean: return "gaussian_mean";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "poisson_counting" || name == "poisson") return ModelKind::poisson_counting;
    if (name == "gmm") return ModelKind::gmm;
    if (name == "signal_background") return ModelKind::signal_background;
    if (name == "gaussian_mean") return ModelKind::gaussian_mean;
    throw ConfigError("unknown model '" + std::string(name) + "'");
}

std::vector<NormalComponent> signal_background_reference(const std::vector<Interval>& bounds) {
    // nu ~ U(bounds[0]), b ~ U(bounds[1]); N | nu,b ~ Poisson(b + nu), M | b ~ Poisson(b).
    const auto mean_of = [](const Interval& iv) { return 0.5 * (iv.lower + iv.upper); };
    const auto var_of = [](const Interval& iv) { return iv.width() * iv.width() / 12.0; };
    const double mean_n = mean_of(bounds[0]) + mean_of(bounds[1]);
    const double var_n = mean_n + var_of(bounds[0]) + var_of(bounds[1]);
    const double mean_m = mean_of(bounds[1]);
    const double var_m = mean_m + var_of(bounds[1]);
    return {{mean_n, std::sqrt(var_n)}, {mean_m, std::sqrt(var_m)}};
}

ModelSpec make_model(ModelKind kind, std::size_t grid_points_per_dim) {
    ModelSpec m;
    m.kind = kind;
    m.n_obs = 10;
    std::vector<Interval> bounds;
    std::size_t default_grid = 100;
    switch (kind) {
    case ModelKind::poisson_counting:
        bounds = {{0.0, 20.0}};
        m.reference = {{110.0, 15.0}};
        m.true_theta = ParamPoint{10.0};
        m.background = 100.0;
        break;
    case ModelKind::gmm:
        bounds = {{0.0, 10.0}};
        m.reference = {{0.0, 5.0}};
        m.true_theta = ParamPoint{5.0};
        break;
    case ModelKind::signal_background:
        bounds = {{0.0, 20.0}, {80.0, 100.0}};
        m.reference = signal_background_reference(bounds);
        m.true_theta = ParamPoint{10.0, 90.0};
        default_grid = 21;
        break;
    case ModelKind::gaussian_mean:
        bounds = {{-5.0, 5.0}};
        m.reference = {{0.0, 5.0}};
        m.true_theta = ParamPoint{0.0};
        break;
    }
    m.data_dim = m.reference.size();
    m.params = ParamSpace(bounds, grid_points_per_dim == 0 ? default_grid : grid_points_per_dim);
    m.proposal = m.params.box();
    return m;
}

std::vector<std::string> model_config_keys() {
    return {"model.name",  "model.lower",      "model.upper",          "model.grid_points",
            "model.n_obs", "model.seed",       "model.true_theta",     "model.background",
            "model.reference_mean", "model.reference_sd"};
}

ModelConfig load_model_config(const KeyValueConfig& cfg) {
    const auto name_entry = cfg.find("model.name");
    if (!name_entry) throw ConfigError("missing required key 'model.name'");
    ModelKind kind;
    try {
        kind = parse_model_kind(name_entry->value);
    } catch (const ConfigError& e) {
        throw ConfigError(e.what(), name_entry->line);
    }

    ModelSpec m = make_model(kind);
    const auto line_of = [&](const std::string& key) {
        const auto* e = cfg.find(key);
        return e ? e->line : std::size_t{0};
    };

    std::vector<Interval> bounds = m.params.bounds();
    if (cfg.has("model.lower") || cfg.has("model.upper")) {
        const auto lo = cfg.get_doubles("model.lower");
        const auto hi = cfg.get_doubles("model.upper");
        if (lo.size() != bounds.size() || hi.size() != bounds.size())
            throw ConfigError("model '" + m.name() + "' needs " + std::to_string(bounds.size()) +
                                  " bound(s) per side",
                              line_of("model.lower"));
        for (std::size_t d = 0; d < bounds.size(); ++d) bounds[d] = {lo[d], hi[d]};
    }
    const auto grid = cfg.get_u64("model.grid_points", m.params.grid_points_per_dim());
    try {
        m.params = ParamSpace(bounds, grid);
    } catch (const DomainError& e) {
        throw ConfigError(e.what(), line_of(cfg.has("model.lower") ? "model.lower" : "model.grid_points"));
    }
    m.proposal = m.params.box();
    if (kind == ModelKind::signal_background) m.reference = signal_background_reference(bounds);

    m.n_obs = cfg.get_u64("model.n_obs", m.n_obs);
    if (m.n_obs < 1) throw ConfigError("n_obs must be at least 1", line_of("model.n_obs"));
    m.background = cfg.get_double("model.background", m.background);

    if (cfg.has("model.reference_mean") || cfg.has("model.reference_sd")) {
        const auto mu = cfg.get_doubles("model.reference_mean");
        const auto sd = cfg.get_doubles("model.reference_sd");
        if (mu.size() != m.data_dim || sd.size() != m.data_dim)
            throw ConfigError("reference needs one mean and sd per data component",
                              line_of("model.reference_mean"));
        for (std::size_t d = 0; d < m.data_dim; ++d) {
            if (!(sd[d] > 0.0)) throw ConfigError("reference sd must be positive", line_of("model.reference_sd"));
            m.reference[d] = {mu[d], sd[d]};
        }
    }

    if (cfg.has("model.true_theta")) {
        const auto t = cfg.get_doubles("model.true_theta");
        if (t.size() != m.params.dim())
            throw ConfigError("true_theta has the wrong dimension", line_of("model.true_theta"));
        ParamPoint p(t.size());
        for (std::size_t d = 0; d < t.size(); ++d) p[d] = t[d];
        if (!m.params.contains(p))
            throw ConfigError("true_theta outside the parameter bounds", line_of("model.true_theta"));
        m.true_theta = p;
    } else if (!m.params.contains(m.true_theta)) {
        throw ConfigError("default true_theta lies outside the configured bounds; set model.true_theta",
                          line_of("model.lower"));
    }

    ModelConfig out;
    out.model = std::move(m);
    if (!cfg.has("model.seed") && !cfg.has("seed"))
        throw ConfigError("a seed is mandatory (set model.seed or seed)");
    out.seed = cfg.has("model.seed") ? cfg.get_u64("model.seed") : cfg.get_u64("seed");
    return out;
}

Observation simulate_one(const ModelSpec& model, const ParamPoint& theta, Rng& rng) {
    switch (model.kind) {
    case ModelKind::poisson_counting: return Observation{rng.poisson(model.background + theta[0])};
    case ModelKind::gmm: {
        const double centre = rng.bernoulli(0.5) ? theta[0] : -theta[0];
        return Observation{rng.normal(centre, 1.0)};
    }
    case ModelKind::signal_background: {
        const double n = rng.poisson(theta[1] + theta[0]);
        const double m = rng.poisson(theta[1]);
        return Observation{n, m};
    }
    case ModelKind::gaussian_mean: return Observation{rng.normal(theta[0], 1.0)};
    }
    return {};
}

Dataset simulate(const ModelSpec& model, const ParamPoint& theta, std::size_t n, Rng& rng) {
    check_theta(model, theta);
    if (n < 1) throw DomainError("sample size must be at least 1");
    Dataset out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(simulate_one(model, theta, rng));
    return out;
}

Observation reference_draw(const ModelSpec& model, Rng& rng) {
    Observation x(model.data_dim);
    for (std::size_t d = 0; d < model.data_dim; ++d)
        x[d] = rng.normal(model.reference[d].mean, model.reference[d].sd);
    return x;
}

ParamPoint prior_draw(const ModelSpec& model, const Box& region, Rng& rng) {
    if (region.dim() != model.params.dim()) throw DomainError("region dimension mismatch");
    if (region.empty()) throw DomainError("empty proposal region");
    ParamPoint p(region.dim());
    for (std::size_t d = 0; d < region.dim(); ++d)
        p[d] = rng.uniform(region.bounds[d].lower, region.bounds[d].upper);
    return p;
}

ParamPoint prior_draw(const ModelSpec& model, Rng& rng) { return prior_draw(model, model.proposal, rng); }

double exact_logpdf(const ModelSpec& model, const ParamPoint& theta, const Observation& x) {
    switch (model.kind) {
    case ModelKind::poisson_counting: return poisson_logpmf(x[0], model.background + theta[0]);
    case ModelKind::gmm: return gmm_logpdf(x[0], theta[0]);
    case ModelKind::signal_background:
        return poisson_logpmf(x[0], theta[1] + theta[0]) + poisson_logpmf(x[1], theta[1]);
    case ModelKind::gaussian_mean: return normal_logpdf(x[0], theta[0], 1.0);
    }
    return kNegInf;
}

double reference_logpdf(const ModelSpec& model, const Observation& x) {
    double out = 0.0;
    for (std::size_t d = 0; d < model.data_dim; ++d)
        out += normal_logpdf(x[d], model.reference[d].mean, model.reference[d].sd);
    return out;
}

double exact_loglik(const ModelSpec& model, const ParamPoint& theta, const Dataset& data) {
    double out = 0.0;
    for (const auto& x : data) out += exact_logpdf(model, theta, x);
    return out;
}

void exact_loglik_many(const ModelSpec& model, std::span<const ParamPoint> thetas,
                       const Dataset& data, std::span<double> out) {
    const double n = static_cast<double>(data.size());
    switch (model.kind) {
    case ModelKind::poisson_counting:
    case ModelKind::signal_background: {
        // Poisson terms depend on the data only through sums of counts and of
        // log-factorials.
        double sum0 = 0.0, sum1 = 0.0, log_fact = 0.0;
        bool negative = false;
        for (const auto& x : data) {
            for (std::size_t d = 0; d < model.data_dim; ++d) {
                if (x[d] < 0.0) negative = true;
                log_fact += std::lgamma(x[d] + 1.0);
            }
            sum0 += x[0];
            if (model.data_dim > 1) sum1 += x[1];
        }
        for (std::size_t j = 0; j < thetas.size(); ++j) {
            if (negative) {
                out[j] = kNegInf;
                continue;
            }
            const auto& t = thetas[j];
            if (model.kind == ModelKind::poisson_counting) {
                const double mean = model.background + t[0];
                out[j] = sum0 * std::log(mean) - n * mean - log_fact;
            } else {
                const double mean_n = t[1] + t[0];
                const double mean_m = t[1];
                out[j] = sum0 * std::log(mean_n) - n * mean_n + sum1 * std::log(mean_m) - n * mean_m -
                         log_fact;
            }
        }
        return;
    }
    case ModelKind::gaussian_mean: {
        double mean = 0.0;
        for (const auto& x : data) mean += x[0];
        mean /= n;
        double ss = 0.0;
        for (const auto& x : data) ss += (x[0] - mean) * (x[0] - mean);
        for (std::size_t j = 0; j < thetas.size(); ++j) {
            const double d = mean - thetas[j][0];
            out[j] = -0.5 * (ss + n * d * d) - n * kHalfLog2Pi;
        }
        return;
    }
    case ModelKind::gmm:
        for (std::size_t j = 0; j < thetas.size(); ++j) out[j] = exact_loglik(model, thetas[j], data);
        return;
    }
}

Moments analytic_moments(const ModelSpec& model, const ParamPoint& theta) {
    switch (model.kind) {
    case ModelKind::poisson_counting: {
        const double mean = model.background + theta[0];
        return {{mean}, {mean}};
    }
    case ModelKind::gmm: return {{0.0}, {theta[0] * theta[0] + 1.0}};
    case ModelKind::signal_background:
        return {{theta[1] + theta[0], theta[1]}, {theta[1] + theta[0], theta[1]}};
    case ModelKind::gaussian_mean: return {{theta[0]}, {1.0}};
    }
    return {};
}

} // namespace acore
