#include "acore/param_space.hpp"

#include <cmath>
#include <string>

#include "acore/error.hpp"

namespace acore {

bool Box::empty() const noexcept {
    if (bounds.empty()) return true;
    for (const auto& iv : bounds)
        if (!(iv.lower <= iv.upper)) return true;
    return false;
}

bool Box::contains(const ParamPoint& p, double tol) const noexcept {
    if (p.size() != bounds.size()) return false;
    for (std::size_t d = 0; d < bounds.size(); ++d)
        if (p[d] < bounds[d].lower - tol || p[d] > bounds[d].upper + tol) return false;
    return true;
}

ParamSpace::ParamSpace(std::vector<Interval> bounds, std::size_t grid_points_per_dim)
    : bounds_(std::move(bounds)), points_per_dim_(grid_points_per_dim) {
    if (bounds_.empty() || bounds_.size() > kMaxDim)
        throw DomainError("parameter space must have 1 or 2 dimensions");
    for (const auto& iv : bounds_) {
        if (!std::isfinite(iv.lower) || !std::isfinite(iv.upper) || !(iv.lower < iv.upper))
            throw DomainError("parameter bounds must be finite with lower < upper");
    }
    if (points_per_dim_ < 2) throw DomainError("grid needs at least 2 points per dimension");

    std::vector<std::vector<double>> axes;
    for (std::size_t d = 0; d < dim(); ++d) axes.push_back(axis(d));

    if (dim() == 1) {
        for (double v : axes[0]) grid_.push_back(ParamPoint{v});
    } else {
        for (double a : axes[0])
            for (double b : axes[1]) grid_.push_back(ParamPoint{a, b});
    }
}

std::vector<double> ParamSpace::axis(std::size_t d) const {
    const auto& iv = bounds_.at(d);
    std::vector<double> out(points_per_dim_);
    const double h = step(d);
    for (std::size_t i = 0; i < points_per_dim_; ++i)
        out[i] = iv.lower + h * static_cast<double>(i);
    out.back() = iv.upper;
    return out;
}

double ParamSpace::step(std::size_t d) const {
    const auto& iv = bounds_.at(d);
    return iv.width() / static_cast<double>(points_per_dim_ - 1);
}

bool ParamSpace::contains(const ParamPoint& p) const noexcept {
    return Box{bounds_}.contains(p);
}

void ParamSpace::require_contains(const ParamPoint& p) const {
    if (p.size() != dim())
        throw DomainError("parameter has dimension " + std::to_string(p.size()) + ", expected " +
                          std::to_string(dim()));
    for (std::size_t d = 0; d < dim(); ++d)
        if (!std::isfinite(p[d]))
            throw DomainError("parameter is not finite");
    if (!contains(p)) throw DomainError("parameter outside the parameter space bounds");
}

std::size_t ParamSpace::nearest_index(const ParamPoint& p) const {
    std::size_t index = 0;
    for (std::size_t d = 0; d < dim(); ++d) {
        const double t = (p[d] - bounds_[d].lower) / step(d);
        double r = std::round(t);
        if (r < 0) r = 0;
        const double last = static_cast<double>(points_per_dim_ - 1);
        if (r > last) r = last;
        index = index * points_per_dim_ + static_cast<std::size_t>(r);
    }
    return index;
}

GridSubset ParamSpace::all() const {
    GridSubset out(grid_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
    return out;
}

GridSubset ParamSpace::subset(const Box& region) const {
    if (region.dim() != dim()) throw DomainError("region dimension does not match parameter space");
    if (region.empty()) throw DomainError("empty parameter region");

    bool point_mass = true;
    for (const auto& iv : region.bounds)
        if (iv.lower != iv.upper) point_mass = false;
    if (point_mass) {
        ParamPoint p(dim());
        for (std::size_t d = 0; d < dim(); ++d) p[d] = region.bounds[d].lower;
        return {nearest_index(p)};
    }

    GridSubset out;
    const double tol = 1e-9 * step(0);
    for (std::size_t i = 0; i < grid_.size(); ++i)
        if (region.contains(grid_[i], tol)) out.push_back(i);
    if (out.empty()) throw DomainError("region contains no grid points");
    return out;
}

} // namespace acore
