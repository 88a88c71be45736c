#include "acore/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "acore/error.hpp"

namespace acore {

namespace {

std::vector<std::string> theta_header(std::size_t dim) {
    std::vector<std::string> h;
    for (std::size_t d = 0; d < dim; ++d) h.push_back("theta" + std::to_string(d));
    return h;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

double parse_cell(const std::string& cell, std::size_t line) {
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0') throw ConfigError("bad number '" + cell + "'", line);
    return v;
}

} // namespace

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << cells[i];
    }
    out << '\n';
}

void write_labeled_csv(std::ostream& out, const LabeledSet& set) {
    const std::size_t pd = set.empty() ? 1 : set.examples.front().theta.size();
    const std::size_t xd = set.empty() ? 1 : set.examples.front().x.size();
    auto header = theta_header(pd);
    for (std::size_t d = 0; d < xd; ++d) header.push_back("x" + std::to_string(d));
    header.push_back("y");
    write_csv_row(out, header);
    for (const auto& e : set.examples) {
        std::vector<std::string> row;
        for (double t : e.theta) row.push_back(format_real(t));
        for (double v : e.x) row.push_back(format_real(v));
        row.push_back(std::to_string(e.y));
        write_csv_row(out, row);
    }
}

LabeledSet read_labeled_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty labeled csv", 1);
    const auto header = split(line);
    std::size_t pd = 0, xd = 0;
    for (const auto& h : header) {
        if (h.rfind("theta", 0) == 0) ++pd;
        else if (h.rfind("x", 0) == 0) ++xd;
    }
    if (pd < 1 || pd > kMaxDim || xd < 1 || xd > kMaxDim || header.size() != pd + xd + 1 || header.back() != "y")
        throw ConfigError("labeled csv header must be theta.., x.., y", 1);

    LabeledSet set;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) throw ConfigError("wrong number of columns", line_no);
        LabeledExample e{ParamPoint(pd, 0.0), Observation(xd, 0.0), 0};
        for (std::size_t d = 0; d < pd; ++d) e.theta[d] = parse_cell(cells[d], line_no);
        for (std::size_t d = 0; d < xd; ++d) e.x[d] = parse_cell(cells[pd + d], line_no);
        if (cells.back() != "0" && cells.back() != "1") throw ConfigError("label must be 0 or 1", line_no);
        e.y = cells.back() == "1";
        set.examples.push_back(e);
    }
    return set;
}

void write_observations_csv(std::ostream& out, const Dataset& data) {
    const std::size_t xd = data.empty() ? 1 : data.front().size();
    std::vector<std::string> header;
    for (std::size_t d = 0; d < xd; ++d) header.push_back("x" + std::to_string(d));
    write_csv_row(out, header);
    for (const auto& x : data) {
        std::vector<std::string> row;
        for (double v : x) row.push_back(format_real(v));
        write_csv_row(out, row);
    }
}

Dataset read_observations_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty data csv", 1);
    const std::size_t xd = split(line).size();
    if (xd < 1 || xd > kMaxDim) throw ConfigError("data csv needs one to two columns", 1);
    Dataset data;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != xd) throw ConfigError("wrong number of columns", line_no);
        Observation x(xd, 0.0);
        for (std::size_t d = 0; d < xd; ++d) x[d] = parse_cell(cells[d], line_no);
        data.push_back(x);
    }
    if (data.empty()) throw ConfigError("data csv has no observations", line_no);
    return data;
}

void write_tau_csv(std::ostream& out, const TauTrainingSet& set) {
    auto header = theta_header(set.pairs.empty() ? 1 : set.pairs.front().theta.size());
    header.push_back("tau");
    write_csv_row(out, header);
    for (const auto& p : set.pairs) {
        std::vector<std::string> row;
        for (double t : p.theta) row.push_back(format_real(t));
        row.push_back(format_real(p.tau));
        write_csv_row(out, row);
    }
}

void write_surface_csv(std::ostream& out, const ParamSpace& space, std::span<const double> surface) {
    auto header = theta_header(space.dim());
    header.push_back("critical");
    write_csv_row(out, header);
    for (std::size_t j = 0; j < space.grid_size(); ++j) {
        std::vector<std::string> row;
        for (double t : space.grid_point(j)) row.push_back(format_real(t));
        row.push_back(format_real(surface[j]));
        write_csv_row(out, row);
    }
}

void write_confidence_csv(std::ostream& out, const ParamSpace& space, const ConfidenceSet& set) {
    auto header = theta_header(space.dim());
    header.insert(header.end(), {"tau", "critical", "accepted"});
    write_csv_row(out, header);
    for (std::size_t j = 0; j < space.grid_size(); ++j) {
        std::vector<std::string> row;
        for (double t : space.grid_point(j)) row.push_back(format_real(t));
        row.push_back(format_real(set.tau[j]));
        row.push_back(format_real(set.cutoffs[j]));
        row.push_back(set.accept_flag[j] ? "1" : "0");
        write_csv_row(out, row);
    }
}

void write_coverage_csv(std::ostream& out, const CoverageReport& report) {
    auto header = theta_header(report.points.empty() ? 1 : report.points.front().theta.size());
    header.insert(header.end(), {"estimate", "lower", "upper", "nominal", "undercovered", "outside_band"});
    write_csv_row(out, header);
    for (const auto& p : report.points) {
        std::vector<std::string> row;
        for (double t : p.theta) row.push_back(format_real(t));
        row.push_back(format_real(p.estimate));
        row.push_back(format_real(std::max(0.0, p.estimate - p.se)));
        row.push_back(format_real(std::min(1.0, p.estimate + p.se)));
        row.push_back(format_real(report.nominal));
        row.push_back(p.undercovered ? "1" : "0");
        row.push_back(p.outside_band ? "1" : "0");
        write_csv_row(out, row);
    }
}

void write_coverage_heatmap(std::ostream& out, const ParamSpace& space, const CoverageReport& report) {
    if (space.dim() != 2) throw DomainError("heat map needs a two-parameter space");
    const auto first = space.axis(0);
    const auto second = space.axis(1);
    std::vector<std::string> header{"theta0\\theta1"};
    for (double v : second) header.push_back(format_real(v));
    write_csv_row(out, header);
    for (std::size_t a = 0; a < first.size(); ++a) {
        std::vector<std::string> row{format_real(first[a])};
        for (std::size_t b = 0; b < second.size(); ++b)
            row.push_back(format_real(report.points[a * second.size() + b].estimate));
        write_csv_row(out, row);
    }
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
    return out;
}

} // namespace acore
