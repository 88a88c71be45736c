#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "acore/neyman.hpp"

namespace acore {

/// Containment indicators W_i = 1{θ'_i ∈ R(D'_i)} for θ'_i drawn from the proposal.
struct CoverageSample {
    std::vector<ParamPoint> theta;
    std::vector<int> contained;

    std::size_t size() const noexcept { return theta.size(); }
    double raw_mean() const;
};

/// Draws B'' parameters from the proposal, one dataset each, builds the
/// confidence set and records whether it holds the grid point nearest θ'_i.
CoverageSample collect_coverage(const OddsModel& odds, std::span<const double> surface, double alpha,
                                std::size_t b_dd, Rng& rng, std::size_t threads = 1);

struct CoveragePoint {
    ParamPoint theta;
    double estimate = 0.0;
    double se = 0.0;
    bool undercovered = false; ///< estimate + 2 se < nominal
    bool outside_band = false; ///< |estimate - nominal| > 2 se
};

struct CoverageReport {
    std::vector<CoveragePoint> points; ///< by grid index
    double nominal = 0.9;
    bool passed = false;
    std::size_t n_samples = 0;
    bool shrunk = false; ///< separation handling was applied

    std::size_t undercovered_count() const;
    std::size_t outside_count() const;
};

/// Logistic regression of W on quadratic features of θ (scaled to [-1, 1]),
/// evaluated on the grid with delta-method standard errors. The report passes
/// when the nominal level lies within two standard errors of the estimate at
/// every grid point, so overcoverage also fails; undercovered points are
/// flagged separately.
///
/// When the fit separates (a fitted probability beyond 1 - 1e-6 or below
/// 1e-6), it is refitted with one W = 1 and one W = 0 pseudo-observation at
/// the mean θ and a small ridge on the non-intercept terms.
CoverageReport fit_coverage_curve(const CoverageSample& sample, const ParamSpace& space, double nominal);

} // namespace acore
