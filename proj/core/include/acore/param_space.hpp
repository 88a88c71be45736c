#pragma once

#include <cstddef>
#include <vector>

#include "acore/small_vec.hpp"

namespace acore {

struct Interval {
    double lower = 0.0;
    double upper = 0.0;

    double width() const noexcept { return upper - lower; }
    bool contains(double v) const noexcept { return v >= lower && v <= upper; }
};

/// Axis-aligned box; the support of every proposal distribution in the zoo.
/// A box with lower == upper in every dimension is a point mass.
struct Box {
    std::vector<Interval> bounds;

    std::size_t dim() const noexcept { return bounds.size(); }
    bool empty() const noexcept;
    bool contains(const ParamPoint& p, double tol = 0.0) const noexcept;
};

/// Indices into a ParamSpace grid, ascending.
using GridSubset = std::vector<std::size_t>;

/// Parameter space Theta with its evaluation grid: the Cartesian product of
/// evenly spaced per-dimension grids, endpoints included. Grid index is
/// row-major with the first dimension varying slowest.
class ParamSpace {
public:
    ParamSpace() = default;
    ParamSpace(std::vector<Interval> bounds, std::size_t grid_points_per_dim);

    std::size_t dim() const noexcept { return bounds_.size(); }
    const std::vector<Interval>& bounds() const noexcept { return bounds_; }
    std::size_t grid_points_per_dim() const noexcept { return points_per_dim_; }
    std::size_t grid_size() const noexcept { return grid_.size(); }

    const std::vector<ParamPoint>& grid() const noexcept { return grid_; }
    const ParamPoint& grid_point(std::size_t index) const { return grid_.at(index); }

    /// Evenly spaced values along one axis.
    std::vector<double> axis(std::size_t d) const;
    double step(std::size_t d) const;

    Box box() const { return Box{bounds_}; }
    bool contains(const ParamPoint& p) const noexcept;

    /// Throws DomainError unless `p` has the right dimension and lies in bounds.
    void require_contains(const ParamPoint& p) const;

    /// Grid index closest to `p` (per-axis rounding, clamped to the bounds).
    std::size_t nearest_index(const ParamPoint& p) const;

    /// Every grid index.
    GridSubset all() const;

    /// Grid indices inside `region`. A point-mass region snaps to its nearest
    /// grid point so simple nulls always select exactly one index.
    GridSubset subset(const Box& region) const;

private:
    std::vector<Interval> bounds_;
    std::size_t points_per_dim_ = 0;
    std::vector<ParamPoint> grid_;
};

} // namespace acore
