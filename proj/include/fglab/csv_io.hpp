#pragma once

#include <charconv>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fglab/galerkin.hpp>
#include <fglab/trajectory.hpp>

namespace fglab {

/// Shortest text that round-trips the value at 17 significant digits,
/// locale independent, so identical runs produce identical bytes.
inline std::string format_value(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    if (res.ec != std::errc()) throw std::runtime_error("csv: number formatting failed");
    return std::string(buf, res.ptr);
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    return os;
}

/// One row per ordered pair n > m of tested dimensions.  The weighted
/// column is defined against the reference (the largest dimension) and is
/// nan on rows between two non-reference dimensions.
inline void write_convergence_csv(std::ostream& os, const ConvergenceReport& r) {
    os << "n,m,lambda_m,cauchy_error,weighted_error\n";
    if (r.dims.empty()) return;
    const std::size_t last = r.dims.size() - 1;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = 1; j < r.dims.size(); ++j)
        for (std::size_t i = 0; i < j; ++i) {
            const double w = (j == last) ? r.weighted[i] : nan;
            os << r.dims[j] << ',' << r.dims[i] << ',' << format_value(r.tail_eigenvalue[i]) << ','
               << format_value(r.cauchy[j][i]) << ',' << format_value(w) << '\n';
        }
}

inline std::string convergence_summary(const ConvergenceReport& r) {
    std::string s;
    s += "dims:";
    for (std::size_t d : r.dims) s += ' ' + std::to_string(d);
    s += '\n';
    if (!r.dims.empty()) {
        const std::size_t last = r.dims.size() - 1;
        s += "reference: " + std::to_string(r.dims[last]) + '\n';
        for (std::size_t i = 0; i < last; ++i) {
            s += "e(" + std::to_string(r.dims[last]) + "," + std::to_string(r.dims[i]) +
                 ") = " + format_value(r.cauchy[last][i]) + "  W(" + std::to_string(r.dims[i]) +
                 ") = " + format_value(r.weighted[i]) + '\n';
        }
    }
    s += "fitted slope: " + format_value(r.fit.slope) + '\n';
    s += "fitted intercept: " + format_value(r.fit.intercept) + '\n';
    s += "fit points: " + std::to_string(r.fit.points) + '\n';
    s += std::string("fit valid: ") + (r.fit.valid ? "yes" : "no") + '\n';
    for (const std::string& w : r.warnings) s += "warning: " + w + '\n';
    return s;
}

/// Every grid node of every piece in order.  Piece boundaries repeat the
/// time on purpose: at an impulse onset the two rows carry the left limit
/// and the reset value.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& y) {
    os << "t,j,coeff\n";
    for (const TrajectoryPiece& piece : y.pieces)
        for (std::size_t k = 0; k <= piece.steps; ++k) {
            const std::string t = format_value(piece.node_time(k));
            const SpectralVector& v = piece.values[k];
            for (std::size_t j = 0; j < v.size(); ++j)
                os << t << ',' << j << ',' << format_value(v.coeffs[j]) << '\n';
        }
}

/// Physical snapshots, one row per (time, position); the oracle and the
/// spectral solver write this same layout so files diff directly.
inline void write_snapshot_csv(std::ostream& os, const std::vector<double>& times,
                               const std::vector<double>& xi,
                               const std::vector<std::vector<double>>& rows) {
    if (times.size() != rows.size()) throw std::invalid_argument("snapshot csv: one row per time required");
    os << "t,xi,w\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (rows[i].size() != xi.size())
            throw std::invalid_argument("snapshot csv: row length must match the position grid");
        const std::string t = format_value(times[i]);
        for (std::size_t k = 0; k < xi.size(); ++k)
            os << t << ',' << format_value(xi[k]) << ',' << format_value(rows[i][k]) << '\n';
    }
}

}  // namespace fglab
