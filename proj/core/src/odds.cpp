#include "acore/odds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "acore/error.hpp"
#include "acore/oracle.hpp"

namespace acore {

namespace {

double softplus(double s) noexcept { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

std::string hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_real(const std::string& tok) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw ConfigError("odds model: bad number '" + tok + "'");
    return v;
}

} // namespace

void OddsSource::log_odds_grid(std::span<const ParamPoint> thetas, std::span<const Observation> xs,
                               std::span<double> out) const {
    for (std::size_t j = 0; j < thetas.size(); ++j)
        for (std::size_t i = 0; i < xs.size(); ++i) out[j * xs.size() + i] = log_odds(thetas[j], xs[i]);
}

void OddsSource::sum_log_odds(std::span<const ParamPoint> thetas, const Dataset& data,
                              std::span<double> out) const {
    std::vector<double> grid(thetas.size() * data.size());
    log_odds_grid(thetas, data, grid);
    for (std::size_t j = 0; j < thetas.size(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) s += grid[j * data.size() + i];
        out[j] = s;
    }
}

void ClassifierOdds::save(std::ostream& out) const {
    out << "source classifier\n";
    classifier_->save(out);
}

ConstantOdds::ConstantOdds(double probability) : probability_(probability) {
    if (!(probability > 0.0 && probability < 1.0)) throw DomainError("constant probability must be in (0, 1)");
    log_odds_ = std::log(probability) - std::log1p(-probability);
}

void ConstantOdds::save(std::ostream& out) const { out << "source constant " << hex(probability_) << '\n'; }

OddsModel::OddsModel(std::shared_ptr<const OddsSource> source, ModelSpec model, double clip_eps)
    : source_(std::move(source)), model_(std::move(model)), clip_eps_(clip_eps) {
    if (!source_) throw DomainError("odds model needs a source");
    if (!(clip_eps > 0.0 && clip_eps < 0.5)) throw DomainError("clip_eps must be in (0, 0.5)");
    max_log_odds_ = std::log1p(-clip_eps) - std::log(clip_eps);
}

double OddsModel::clamp(double log_odds) const noexcept {
    if (std::isnan(log_odds)) return 0.0;
    return std::clamp(log_odds, -max_log_odds_, max_log_odds_);
}

double OddsModel::log_odds(const ParamPoint& theta, const Observation& x) const {
    const double v = source_->log_odds(theta, x);
    return source_->clipped() ? clamp(v) : v;
}

double OddsModel::probability(const ParamPoint& theta, const Observation& x) const {
    const double p = 1.0 / (1.0 + std::exp(-clamp(source_->log_odds(theta, x))));
    return std::clamp(p, clip_eps_, 1.0 - clip_eps_);
}

void OddsModel::sum_log_odds(std::span<const ParamPoint> thetas, const Dataset& data,
                             std::span<double> out) const {
    if (!source_->clipped()) {
        source_->sum_log_odds(thetas, data, out);
        return;
    }
    thread_local std::vector<double> grid;
    grid.resize(thetas.size() * data.size());
    source_->log_odds_grid(thetas, data, grid);
    for (std::size_t j = 0; j < thetas.size(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) s += clamp(grid[j * data.size() + i]);
        out[j] = s;
    }
}

std::vector<double> OddsModel::grid_profile(const Dataset& data) const {
    const auto& grid = model_.params.grid();
    std::vector<double> out(grid.size());
    sum_log_odds(grid, data, out);
    return out;
}

void OddsModel::save(std::ostream& out) const {
    out << "acore-odds-model 1\n";
    out << "model " << model_.name() << '\n';
    out << "clip_eps " << hex(clip_eps_) << '\n';
    source_->save(out);
}

OddsModel train_odds(const LabeledSet& sample, const ClassifierSpec& spec, const ModelSpec& model, Rng& rng) {
    if (!sample.empty() && (sample.examples.front().theta.size() != model.params.dim() ||
                            sample.examples.front().x.size() != model.data_dim))
        throw DomainError("labeled sample does not match the model dimensions");
    auto classifier = fit_classifier(spec, sample, rng);
    return OddsModel(std::make_shared<ClassifierOdds>(std::move(classifier)), model);
}

OddsModel load_odds(std::istream& in, const ModelSpec& model) {
    std::string tok, version;
    if (!(in >> tok >> version) || tok != "acore-odds-model") throw ConfigError("not an odds model file");
    if (version != "1") throw ConfigError("unsupported odds model version " + version);
    std::string key, name;
    if (!(in >> key >> name) || key != "model") throw ConfigError("odds model: missing model line");
    if (name != model.name())
        throw ConfigError("odds model was trained for '" + name + "', not '" + model.name() + "'");
    if (!(in >> key >> tok) || key != "clip_eps") throw ConfigError("odds model: missing clip_eps");
    const double clip = parse_real(tok);
    if (!(in >> key >> tok) || key != "source") throw ConfigError("odds model: missing source");

    std::shared_ptr<const OddsSource> source;
    if (tok == "classifier") {
        source = std::make_shared<ClassifierOdds>(load_classifier(in));
    } else if (tok == "constant") {
        if (!(in >> tok)) throw ConfigError("odds model: missing constant");
        source = std::make_shared<ConstantOdds>(parse_real(tok));
    } else if (tok == "exact") {
        if (!(in >> tok)) throw ConfigError("odds model: missing oracle p");
        source = std::make_shared<ExactOddsOracle>(model, parse_real(tok));
    } else {
        throw ConfigError("odds model: unknown source '" + tok + "'");
    }
    return OddsModel(std::move(source), model, clip);
}

double odds(const OddsModel& m, const ParamPoint& theta, const Observation& x) {
    m.model().params.require_contains(theta);
    return std::exp(m.log_odds(theta, x));
}

double log_odds_ratio(const OddsModel& m, const Observation& x, const ParamPoint& theta0,
                      const ParamPoint& theta1) {
    m.model().params.require_contains(theta0);
    m.model().params.require_contains(theta1);
    if (theta0 == theta1) return 0.0;
    return m.log_odds(theta0, x) - m.log_odds(theta1, x);
}

double odds_ratio(const OddsModel& m, const Observation& x, const ParamPoint& theta0, const ParamPoint& theta1) {
    return std::exp(log_odds_ratio(m, x, theta0, theta1));
}

TauResult tau_from_profile(std::span<const double> profile, const GridSubset& theta0_region) {
    if (theta0_region.empty()) throw DomainError("null region is empty");
    if (profile.empty()) throw DomainError("empty grid profile");
    TauResult r;
    for (std::size_t j = 1; j < profile.size(); ++j)
        if (profile[j] > profile[r.argmin_theta1]) r.argmin_theta1 = j;
    r.argmax_theta0 = theta0_region.front();
    for (std::size_t idx : theta0_region) {
        if (idx >= profile.size()) throw DomainError("null region index outside the grid");
        if (profile[idx] > profile[r.argmax_theta0] ||
            (profile[idx] == profile[r.argmax_theta0] && idx < r.argmax_theta0))
            r.argmax_theta0 = idx;
    }
    r.tau = profile[r.argmax_theta0] - profile[r.argmin_theta1];
    return r;
}

TauResult acore_statistic(const OddsModel& m, const Dataset& data, const GridSubset& theta0_region) {
    if (theta0_region.empty()) throw DomainError("null region is empty");
    if (data.empty()) throw DomainError("empty dataset");
    return tau_from_profile(m.grid_profile(data), theta0_region);
}

double tau_simple(const OddsModel& m, const Dataset& data, const ParamPoint& theta) {
    m.model().params.require_contains(theta);
    const auto profile = m.grid_profile(data);
    double own = 0.0;
    m.sum_log_odds(std::span<const ParamPoint>(&theta, 1), data, std::span<double>(&own, 1));
    const double best = std::max(*std::max_element(profile.begin(), profile.end()), own);
    return own - best;
}

std::vector<double> cross_entropy_terms(const OddsModel& m, const LabeledSet& holdout) {
    if (holdout.empty()) throw DomainError("empty holdout");
    std::vector<double> out;
    out.reserve(holdout.size());
    for (const auto& e : holdout.examples) {
        const double lo = m.log_odds(e.theta, e.x);
        out.push_back(e.y == 1 ? softplus(-lo) : softplus(lo));
    }
    return out;
}

double cross_entropy(const OddsModel& m, const LabeledSet& holdout) {
    const auto terms = cross_entropy_terms(m, holdout);
    double s = 0.0;
    for (double t : terms) s += t;
    return s / static_cast<double>(terms.size());
}

} // namespace acore
