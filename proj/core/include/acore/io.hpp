#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "acore/diagnostics.hpp"
#include "acore/labeled_sample.hpp"
#include "acore/neyman.hpp"
#include "acore/quantile.hpp"

namespace acore {

/// Fixed-format number for CSV output; identical inputs give identical text.
std::string format_real(double v);

/// Comma-joined row with a trailing newline.
void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

/// Columns theta0.., x0.., y.
void write_labeled_csv(std::ostream& out, const LabeledSet& set);
LabeledSet read_labeled_csv(std::istream& in);

/// Columns x0..; one observation per row.
void write_observations_csv(std::ostream& out, const Dataset& data);
Dataset read_observations_csv(std::istream& in);

/// Columns theta0.., tau.
void write_tau_csv(std::ostream& out, const TauTrainingSet& set);

/// Columns theta0.., critical.
void write_surface_csv(std::ostream& out, const ParamSpace& space, std::span<const double> surface);

/// Columns theta0.., tau, critical, accepted.
void write_confidence_csv(std::ostream& out, const ParamSpace& space, const ConfidenceSet& set);

/// Columns theta0.., estimate, lower, upper, nominal, undercovered,
/// outside_band; bands are
/// one standard error.
void write_coverage_csv(std::ostream& out, const CoverageReport& report);

/// Estimated coverage as a matrix for two-parameter spaces: one row per value
/// of the first parameter, one column per value of the second.
void write_coverage_heatmap(std::ostream& out, const ParamSpace& space, const CoverageReport& report);

/// Opens `path` for writing, creating parent directories; throws on failure.
std::ofstream open_output(const std::filesystem::path& path);

} // namespace acore
