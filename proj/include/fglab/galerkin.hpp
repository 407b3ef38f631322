#pragma once

// Galerkin truncations of computed trajectories and the convergence
// measurements between them: pairwise sup-in-time graded gaps (the Cauchy
// matrix), power-law rate fits against the spectrum, and weighted coefficient
// errors against a reference solve.
//
// All comparisons align grids exactly: two solutions are comparable when
// their pieces span the same intervals and one node count divides the other,
// in which case the sup runs over the common (coarser) nodes.  No
// inter-grid interpolation happens in diagnostics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fglab/solver.hpp"
#include "fglab/spectral.hpp"
#include "fglab/trajectory.hpp"

namespace fglab {

/// Truncated approximant: trajectory coefficients projected to modes 0..dim,
/// prefixed by the sampled history piece on [-delay, 0].
struct GalerkinSolution {
    std::size_t dim = 0;
    double alpha = 0.5;
    double requested_dt = 0.0;
    std::size_t refine = 1;
    TimePartition partition;
    std::vector<TrajectoryPiece> pieces;
};

/// Truncate a solved trajectory to modes 0..n.  n may not exceed the
/// dimension the trajectory was solved with.
inline GalerkinSolution faedo_galerkin(const Trajectory& y, std::size_t n) {
    if (n > y.dim)
        throw std::domain_error("faedo_galerkin: requested dimension " + std::to_string(n) +
                                " exceeds the solve resolution " + std::to_string(y.dim));
    GalerkinSolution g;
    g.dim = n;
    g.alpha = y.alpha;
    g.requested_dt = y.requested_dt;
    g.refine = y.refine;
    g.partition = y.partition;

    TrajectoryPiece hist;
    hist.start = -y.partition.delay;
    hist.end = 0.0;
    hist.steps = detail::step_count(y.partition.delay, y.requested_dt) * y.refine;
    hist.values.reserve(hist.steps + 1);
    for (std::size_t k = 0; k <= hist.steps; ++k)
        hist.values.push_back(project(n, y.history.value(std::min(0.0, hist.node_time(k)))));
    g.pieces.push_back(std::move(hist));

    for (const TrajectoryPiece& piece : y.pieces) {
        TrajectoryPiece copy;
        copy.start = piece.start;
        copy.end = piece.end;
        copy.steps = piece.steps;
        copy.impulse = piece.impulse;
        copy.window_index = piece.window_index;
        copy.values.reserve(piece.values.size());
        for (const SpectralVector& v : piece.values) copy.values.push_back(project(n, v));
        g.pieces.push_back(std::move(copy));
    }
    return g;
}

inline GalerkinSolution faedo_galerkin(const Trajectory& y) { return faedo_galerkin(y, y.dim); }

namespace detail {

inline void require_comparable(const GalerkinSolution& a, const GalerkinSolution& b) {
    const bool same_partition = a.partition.horizon == b.partition.horizon &&
                                a.partition.delay == b.partition.delay && a.partition.onset == b.partition.onset &&
                                a.partition.release == b.partition.release;
    if (!same_partition || a.pieces.size() != b.pieces.size())
        throw std::domain_error("diagnostics: solutions discretize different problems");
    for (std::size_t i = 0; i < a.pieces.size(); ++i) {
        const TrajectoryPiece& pa = a.pieces[i];
        const TrajectoryPiece& pb = b.pieces[i];
        if (pa.start != pb.start || pa.end != pb.end)
            throw std::domain_error("diagnostics: piece spans differ");
        const std::size_t hi = std::max(pa.steps, pb.steps);
        const std::size_t lo = std::min(pa.steps, pb.steps);
        if (lo == 0 || hi % lo != 0)
            throw std::domain_error("diagnostics: grids are not nested (steps " + std::to_string(pa.steps) +
                                    " vs " + std::to_string(pb.steps) + ")");
    }
}

/// Sup over the common (coarser) nodes of the graded gap between two
/// comparable solutions.
inline double sup_gap(const Spectrum& sp, double alpha, const GalerkinSolution& a, const GalerkinSolution& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.pieces.size(); ++i) {
        const TrajectoryPiece& pa = a.pieces[i];
        const TrajectoryPiece& pb = b.pieces[i];
        const std::size_t coarse = std::min(pa.steps, pb.steps);
        const std::size_t ra = pa.steps / coarse;
        const std::size_t rb = pb.steps / coarse;
        for (std::size_t k = 0; k <= coarse; ++k)
            worst = std::max(worst, alpha_norm(sp, alpha, pa.values[k * ra] - pb.values[k * rb]));
    }
    return worst;
}

}  // namespace detail

struct RateFit {
    double slope = std::numeric_limits<double>::quiet_NaN();
    double intercept = std::numeric_limits<double>::quiet_NaN();
    std::size_t points = 0;
    bool valid = false;
};

struct ConvergenceReport {
    std::vector<std::size_t> dims;           ///< ascending; the last entry is the reference
    std::vector<double> tail_eigenvalue;     ///< eigenvalue at each truncation index
    std::vector<std::vector<double>> cauchy; ///< e(dims[i], dims[j]), symmetric, zero diagonal
    std::vector<double> weighted;            ///< W(dims[i]) against the reference; NaN for the reference itself
    RateFit fit;
    std::vector<std::string> warnings;
};

/// Pairwise sup-in-time graded gaps between at least three comparable
/// solutions with strictly increasing dimensions.
inline ConvergenceReport cauchy_matrix(const std::vector<GalerkinSolution>& sols, const Spectrum& sp,
                                       double alpha) {
    if (sols.size() < 3)
        throw std::invalid_argument("cauchy_matrix: need at least 3 dimensions, got " +
                                    std::to_string(sols.size()));
    for (std::size_t i = 1; i < sols.size(); ++i) {
        if (sols[i].dim <= sols[i - 1].dim)
            throw std::invalid_argument("cauchy_matrix: dimensions must be strictly increasing");
        detail::require_comparable(sols[0], sols[i]);
    }

    ConvergenceReport report;
    report.dims.reserve(sols.size());
    for (const GalerkinSolution& s : sols) {
        report.dims.push_back(s.dim);
        report.tail_eigenvalue.push_back(sp[s.dim]);
    }
    report.cauchy.assign(sols.size(), std::vector<double>(sols.size(), 0.0));
    for (std::size_t i = 0; i < sols.size(); ++i)
        for (std::size_t j = i + 1; j < sols.size(); ++j) {
            const double e = detail::sup_gap(sp, alpha, sols[i], sols[j]);
            report.cauchy[i][j] = e;
            report.cauchy[j][i] = e;
        }
    report.weighted.assign(sols.size(), std::numeric_limits<double>::quiet_NaN());
    return report;
}

/// Sup over shared grid times of sum_{j <= test.dim} lambda_j^{2 alpha}
/// (ref_j(t) - test_j(t))^2, the weighted coefficient gap against a
/// higher-dimensional reference.
inline double weighted_coefficient_error(const GalerkinSolution& ref, const GalerkinSolution& test,
                                         const Spectrum& sp, double alpha) {
    if (ref.dim < test.dim)
        throw std::domain_error("weighted_coefficient_error: reference dimension below test dimension");
    detail::require_comparable(ref, test);
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.pieces.size(); ++i) {
        const TrajectoryPiece& pr = ref.pieces[i];
        const TrajectoryPiece& pt = test.pieces[i];
        const std::size_t coarse = std::min(pr.steps, pt.steps);
        const std::size_t rr = pr.steps / coarse;
        const std::size_t rt = pt.steps / coarse;
        for (std::size_t k = 0; k <= coarse; ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j <= test.dim; ++j) {
                const double gap = pr.values[k * rr][j] - pt.values[k * rt][j];
                acc += std::pow(sp[j], 2.0 * alpha) * gap * gap;
            }
            worst = std::max(worst, acc);
        }
    }
    return worst;
}

/// Least-squares fit of log e(reference, m) against log(tail eigenvalue at m)
/// over the non-reference dimensions.  Zero or non-finite errors are excluded
/// with a warning; at least two surviving points make the fit valid.  The
/// result is also stored on the report.
inline RateFit rate_fit(ConvergenceReport& report) {
    RateFit fit;
    const std::size_t ref = report.dims.size() - 1;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i + 1 < report.dims.size(); ++i) {
        const double e = report.cauchy[ref][i];
        if (!(e > 0.0) || !std::isfinite(e)) {
            report.warnings.push_back("rate fit: dimension " + std::to_string(report.dims[i]) +
                                      " excluded (error not positive)");
            continue;
        }
        xs.push_back(std::log(report.tail_eigenvalue[i]));
        ys.push_back(std::log(e));
    }
    fit.points = xs.size();
    if (fit.points >= 2) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sx += xs[i];
            sy += ys[i];
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
        }
        const double n = static_cast<double>(xs.size());
        const double denom = n * sxx - sx * sx;
        fit.slope = (n * sxy - sx * sy) / denom;
        fit.intercept = (sy - fit.slope * sx) / n;
        fit.valid = true;
    } else {
        report.warnings.push_back("rate fit: fewer than 2 positive errors, fit invalid");
    }
    report.fit = fit;
    return fit;
}

}  // namespace fglab
