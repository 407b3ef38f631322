#pragma once

// Mild-solution solver.  On each flow interval (s, e] the state satisfies
//
//     y(t) = T(t - s) y(s+) + int_s^t T(t - r) F(r, P_n y_r) dr,
//
// and on each impulse window the state is prescribed by the window map
// applied to the projected left limit at the onset.  The flow fixed point is
// solved by Picard sweeps; the convolution is evaluated per mode with the
// exponential trapezoidal rule, which integrates exactly whenever the forcing
// coefficient is linear in time:
//
//     int_{t_k}^{t_{k+1}} e^{-l (t_{k+1} - r)} g(r) dr
//         ~ w_left(l, h) g(t_k) + w_right(l, h) g(t_{k+1}),
//
//     w_left = h (phi1(z) - phi2(z)),  w_right = h phi2(z),  z = -l h,
//     phi1(z) = (e^z - 1) / z,         phi2(z) = (e^z - 1 - z) / z^2.
//
// Both weights are positive, their sum is (1 - e^{-l h}) / l, and as l h -> 0
// they approach the trapezoid weights h/2.  Stiff modes (l h large) get
// weights ~ 1/l with no stability constraint on h.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fglab/problem.hpp"
#include "fglab/spectral.hpp"
#include "fglab/trajectory.hpp"

namespace fglab {

/// phi1(z) = (e^z - 1)/z with a Taylor branch near zero.
inline double phi1(double z) {
    if (std::abs(z) < 1e-3) {
        // sum_{k=0..5} z^k / (k+1)!  (next term ~ 1e-21 at |z| = 1e-3)
        double acc = 1.0 / 5040.0;
        for (double d : {720.0, 120.0, 24.0, 6.0, 2.0, 1.0}) acc = acc * z + 1.0 / d;
        return acc;
    }
    return std::expm1(z) / z;
}

/// phi2(z) = (e^z - 1 - z)/z^2 with a Taylor branch near zero.
inline double phi2(double z) {
    if (std::abs(z) < 1e-3) {
        double acc = 1.0 / 40320.0;
        for (double d : {5040.0, 720.0, 120.0, 24.0, 6.0, 2.0}) acc = acc * z + 1.0 / d;
        return acc;
    }
    return (std::expm1(z) - z) / (z * z);
}

struct StepWeights {
    double left = 0.0;
    double right = 0.0;
};

/// Exponential trapezoidal weights for one step of width h on a mode with
/// eigenvalue lambda.
inline StepWeights quadrature_weights(double lambda, double h) {
    if (!(lambda > 0.0)) throw std::domain_error("quadrature_weights: eigenvalue must be positive");
    if (!(h > 0.0)) throw std::domain_error("quadrature_weights: step must be positive");
    const double z = -lambda * h;
    const double p2 = phi2(z);
    return {h * (phi1(z) - p2), h * p2};
}

struct SolverConfig {
    std::size_t dim = 64;        ///< Galerkin dimension n: forcing arguments are projected to modes 0..n
    double dt = 1e-3;            ///< requested node spacing; each piece uses ceil(length/dt) steps
    double picard_tol = 1e-10;   ///< sup-alpha distance between sweeps that counts as converged
    int picard_max_iter = 200;
    double alpha = 0.5;          ///< graded norm the fixed point is measured in
    std::size_t refine = 1;      ///< power-of-two step multiplier for nested reference grids

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("solver config: dt must be positive");
        if (!(picard_tol > 0.0)) throw std::invalid_argument("solver config: picard_tol must be positive");
        if (picard_max_iter < 1) throw std::invalid_argument("solver config: picard_max_iter must be >= 1");
        if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("solver config: alpha must lie in (0, 1)");
        if (refine == 0 || (refine & (refine - 1)) != 0)
            throw std::invalid_argument("solver config: refine must be a power of two");
    }
};

/// Picard sweeps exhausted without reaching the tolerance.
class PicardError : public std::runtime_error {
public:
    PicardError(std::size_t interval_, int sweeps_, double residual_)
        : std::runtime_error("picard iteration on flow interval " + std::to_string(interval_) +
                             " stalled at residual " + std::to_string(residual_) + " after " +
                             std::to_string(sweeps_) + " sweeps"),
          interval(interval_),
          sweeps(sweeps_),
          residual(residual_) {}

    std::size_t interval;
    int sweeps;
    double residual;
};

namespace detail {

/// Steps for a piece of the given length: round when length/dt is within
/// rounding noise of an integer, otherwise take the ceiling.
inline std::size_t step_count(double length, double dt) {
    const double raw = length / dt;
    const double rounded = std::round(raw);
    std::size_t k;
    if (std::abs(raw - rounded) < 1e-9 * std::max(1.0, raw))
        k = static_cast<std::size_t>(rounded);
    else
        k = static_cast<std::size_t>(std::ceil(raw));
    return std::max<std::size_t>(1, k);
}

/// One pass of the discrete mild map over a flow grid: forcing sampled from
/// state_at (any callable time -> state), homogeneous part from the initial
/// value, convolution by the per-mode exponential recurrence
///
///     I_j(t_{k+1}) = e^{-l_j h} I_j(t_k) + w_left g_j(t_k) + w_right g_j(t_{k+1}).
template <class StateAt>
std::vector<SpectralVector> mild_sweep(const ProblemSpec& p, const SolverConfig& cfg, double start, double end,
                                       std::size_t steps, const SpectralVector& initial, StateAt&& state_at) {
    const Spectrum& sp = p.spectrum;
    const double length = end - start;
    const double h = length / static_cast<double>(steps);
    const double tau = p.partition.delay;
    const double theta_slack = 1e-9 * std::max(1.0, tau);

    std::vector<SpectralVector> g(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = start + (static_cast<double>(k) * length) / static_cast<double>(steps);
        const SegmentFn segment = [&, t](double theta) {
            if (theta < -tau - theta_slack || theta > theta_slack)
                throw std::domain_error("segment: offset outside [-delay, 0]");
            const double u = t + std::min(0.0, std::max(theta, -tau));
            return project(cfg.dim, state_at(u));
        };
        g[k] = p.forcing.value(t, segment);
        if (g[k].size() > sp.size())
            throw std::invalid_argument("solver: forcing output has more modes than the spectrum resolves");
    }

    std::size_t modes = initial.size();
    for (const SpectralVector& v : g) modes = std::max(modes, v.size());
    modes = std::min(modes, cfg.dim + 1);  // the Galerkin state lives on modes 0..dim

    std::vector<SpectralVector> out(steps + 1, SpectralVector::zero(modes));
    for (std::size_t j = 0; j < modes; ++j) {
        const double lambda = sp[j];
        const StepWeights w = quadrature_weights(lambda, h);
        const double decay = std::exp(-lambda * h);
        const double u0 = initial[j];
        double conv = 0.0;
        out[0].coeffs[j] = u0;
        for (std::size_t k = 0; k < steps; ++k) {
            conv = decay * conv + w.left * g[k][j] + w.right * g[k + 1][j];
            const double t_rel = (static_cast<double>(k + 1) * length) / static_cast<double>(steps);
            out[k + 1].coeffs[j] = std::exp(-lambda * t_rel) * u0 + conv;
        }
    }
    return out;
}

}  // namespace detail

/// Prescribed piece on impulse window i (1-based): values h_i(t_k, P_n v)
/// over the window grid, where v is the left limit at the onset.
inline TrajectoryPiece impulse_piece(const ProblemSpec& p, std::size_t window, const SpectralVector& left_limit,
                                     const SolverConfig& cfg) {
    if (window == 0 || window > p.impulses.size()) throw std::out_of_range("impulse_piece: window index");
    const auto [s, e] = p.partition.window_span(window);
    TrajectoryPiece piece;
    piece.start = s;
    piece.end = e;
    piece.steps = detail::step_count(e - s, cfg.dt) * cfg.refine;
    piece.impulse = true;
    piece.window_index = window;
    const SpectralVector arg = project(cfg.dim, left_limit);
    const ImpulseMap& h = p.impulses[window - 1];
    piece.values.reserve(piece.steps + 1);
    for (std::size_t k = 0; k <= piece.steps; ++k)
        piece.values.push_back(project(cfg.dim, h.value(piece.node_time(k), arg)));
    return piece;
}

/// Picard fixed point on flow interval i (0-based) starting from the given
/// initial value; partial is the trajectory computed so far (pieces strictly
/// before this interval), consulted by delayed lookups.  Throws PicardError
/// if the tolerance is not reached within the sweep budget.
inline TrajectoryPiece flow_piece(const ProblemSpec& p, std::size_t interval, const SpectralVector& initial,
                                  const Trajectory& partial, const SolverConfig& cfg, PicardStats& stats) {
    const auto [s, e] = p.partition.flow_span(interval);
    TrajectoryPiece piece;
    piece.start = s;
    piece.end = e;
    piece.steps = detail::step_count(e - s, cfg.dt) * cfg.refine;
    const std::size_t K = piece.steps;
    const double h = piece.length() / static_cast<double>(K);

    std::vector<SpectralVector> iterate(K + 1);
    for (std::size_t k = 0; k <= K; ++k)
        iterate[k] = semigroup_apply(p.spectrum, static_cast<double>(k) * h, initial);

    double scale = 1.0;
    for (const SpectralVector& v : iterate) scale = std::max(scale, alpha_norm(p.spectrum, cfg.alpha, v));
    const double ratio_floor = 1e-12 * scale;

    const auto overlay = [&](double u) -> SpectralVector {
        if (u <= s) return partial.value(u);
        double rel = (u - s) / h;
        if (rel < 0.0) rel = 0.0;
        std::size_t k = static_cast<std::size_t>(rel);
        if (k >= K) k = K - 1;
        double frac = rel - static_cast<double>(k);
        if (frac < 0.0) frac = 0.0;
        if (frac > 1.0) frac = 1.0;
        if (frac == 0.0) return iterate[k];
        return iterate[k] + (frac * (iterate[k + 1] - iterate[k]));
    };

    stats = PicardStats{};
    stats.interval = interval;
    double prev_dist = -1.0;
    for (int sweep = 1; sweep <= cfg.picard_max_iter; ++sweep) {
        std::vector<SpectralVector> next = detail::mild_sweep(p, cfg, s, e, K, initial, overlay);
        double dist = 0.0;
        for (std::size_t k = 0; k <= K; ++k)
            dist = std::max(dist, alpha_norm(p.spectrum, cfg.alpha, next[k] - iterate[k]));
        iterate = std::move(next);
        stats.sweeps = sweep;
        stats.residual = dist;
        if (prev_dist > ratio_floor && dist > 0.0)
            stats.worst_ratio = std::max(stats.worst_ratio, dist / prev_dist);
        prev_dist = dist;
        if (dist < cfg.picard_tol) {
            piece.values = std::move(iterate);
            return piece;
        }
    }
    throw PicardError(interval, cfg.picard_max_iter, stats.residual);
}

/// Solve the full problem: alternate flow fixed points and prescribed window
/// pieces, recording left limits, Picard diagnostics and certification
/// warnings on the returned trajectory.
inline Trajectory solve(const ProblemSpec& p, const SolverConfig& cfg,
                        const AssumptionReport* report = nullptr) {
    p.validate();
    cfg.validate();
    if (cfg.dim + 1 > p.spectrum.size())
        throw std::invalid_argument("solve: Galerkin dimension exceeds the resolved spectrum");

    AssumptionReport local;
    if (report == nullptr) {
        local = compute_assumption_report(p, cfg.alpha);
        report = &local;
    }

    Trajectory y;
    y.partition = p.partition;
    y.history = p.history;
    y.alpha = cfg.alpha;
    y.dim = cfg.dim;
    y.requested_dt = cfg.dt;
    y.refine = cfg.refine;
    y.certified = report->certified();
    if (!report->flow_gates_pass)
        y.warnings.push_back("uncertified: a flow contraction factor is >= 1 (max " +
                             std::to_string(*std::max_element(report->flow_contraction.begin(),
                                                              report->flow_contraction.end())) +
                             ")");
    if (!report->contraction_gate_pass)
        y.warnings.push_back("uncertified: contraction constant " +
                             std::to_string(report->contraction_constant) + " >= 1");

    const std::size_t q = p.partition.window_count();
    for (std::size_t i = 0; i <= q; ++i) {
        const SpectralVector initial = (i == 0) ? p.history.value(0.0) : y.pieces.back().values.back();
        PicardStats stats;
        TrajectoryPiece flow = flow_piece(p, i, initial, y, cfg, stats);
        y.picard.push_back(stats);
        y.pieces.push_back(std::move(flow));
        if (i < q) {
            const SpectralVector left = y.pieces.back().values.back();
            y.onset_left_limits.push_back(left);
            y.pieces.push_back(impulse_piece(p, i + 1, left, cfg));
        }
    }

    if (y.certified) {
        const SpectralVector center = p.history.value(0.0);
        double excursion = 0.0;
        for (const TrajectoryPiece& piece : y.pieces)
            for (const SpectralVector& v : piece.values)
                excursion = std::max(excursion, alpha_norm(p.spectrum, cfg.alpha, v - center));
        if (excursion > report->ball_radius)
            y.warnings.push_back("trajectory left the certified ball: excursion " + std::to_string(excursion) +
                                 " > radius " + std::to_string(report->ball_radius));
    }
    return y;
}

/// Sup-alpha defect between the stored trajectory and a single re-evaluation
/// of the governing branches sourced from the completed trajectory itself: the
/// integral branch on flow pieces, the prescription on window pieces.  A
/// converged run satisfies this within a small multiple of picard_tol.
inline double mild_defect(const ProblemSpec& p, const Trajectory& y) {
    SolverConfig cfg;
    cfg.dim = y.dim;
    cfg.dt = y.requested_dt;
    cfg.alpha = y.alpha;
    cfg.refine = y.refine;

    double defect = 0.0;
    const auto state_at = [&y](double u) { return y.value(u); };
    std::size_t flow_index = 0;
    for (const TrajectoryPiece& piece : y.pieces) {
        if (piece.impulse) {
            const SpectralVector arg = project(y.dim, y.left_limit(piece.window_index));
            const ImpulseMap& h = p.impulses[piece.window_index - 1];
            for (std::size_t k = 0; k <= piece.steps; ++k) {
                const SpectralVector fresh = project(y.dim, h.value(piece.node_time(k), arg));
                defect = std::max(defect, alpha_norm(p.spectrum, y.alpha, fresh - piece.values[k]));
            }
        } else {
            const std::vector<SpectralVector> fresh =
                detail::mild_sweep(p, cfg, piece.start, piece.end, piece.steps, piece.values.front(), state_at);
            for (std::size_t k = 0; k <= piece.steps; ++k)
                defect = std::max(defect, alpha_norm(p.spectrum, y.alpha, fresh[k] - piece.values[k]));
            ++flow_index;
        }
    }
    return defect;
}

}  // namespace fglab
