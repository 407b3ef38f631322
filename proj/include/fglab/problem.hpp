#pragma once

// Problem data for the delayed parabolic evolution with non-instantaneous
// impulses, plus the constants ledger that certifies solvability.
//
// The time axis [0, T] is split by an interleaved partition
//
//     0 < onset_1 < release_1 < onset_2 < ... < release_q < T.
//
// On each flow interval (release_i, onset_{i+1}] the state obeys the mild
// integral equation driven by the delayed forcing F(t, y_t); on each impulse
// window (onset_i, release_i] the state is prescribed pointwise by a map
// h_i(t, y(onset_i^-)) of the left limit.
//
// All Lipschitz-type constants are declared by the caller; the ledger only
// combines them with computed history norms, so a report is a certificate
// relative to the declared values.  Sampled validators below measure the
// declared constants against the actual callables.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fglab/random.hpp"
#include "fglab/spectral.hpp"

namespace fglab {

/// Delayed-segment view: theta in [-delay, 0] maps to the state at t + theta.
using SegmentFn = std::function<SpectralVector(double)>;

/// Interleaved impulse/flow partition of [0, horizon] with delay depth.
struct TimePartition {
    double horizon = 1.0;
    double delay = 0.1;
    std::vector<double> onset;    ///< left endpoints of the impulse windows
    std::vector<double> release;  ///< right endpoints of the impulse windows

    std::size_t window_count() const { return onset.size(); }

    void validate() const {
        if (!(horizon > 0.0)) throw std::invalid_argument("partition: horizon must be positive");
        if (!(delay > 0.0)) throw std::invalid_argument("partition: delay must be positive");
        if (onset.size() != release.size())
            throw std::invalid_argument("partition: onset/release counts differ");
        double prev = 0.0;
        const char* prev_name = "0";
        for (std::size_t i = 0; i < onset.size(); ++i) {
            const std::string idx = std::to_string(i + 1);
            if (!(onset[i] > prev))
                throw std::invalid_argument("partition: onset[" + idx + "] = " + std::to_string(onset[i]) +
                                            " must exceed " + prev_name + " = " + std::to_string(prev));
            if (!(release[i] > onset[i]))
                throw std::invalid_argument("partition: release[" + idx + "] = " + std::to_string(release[i]) +
                                            " must exceed onset[" + idx + "] = " + std::to_string(onset[i]));
            prev = release[i];
            prev_name = "release";
        }
        if (!onset.empty() && !(horizon > release.back()))
            throw std::invalid_argument("partition: horizon = " + std::to_string(horizon) +
                                        " must exceed release[" + std::to_string(onset.size()) + "] = " +
                                        std::to_string(release.back()));
    }

    /// Flow interval i = 0..q as [start, end]; interval 0 starts at 0,
    /// interval i starts at release_i, and the last one ends at the horizon.
    std::pair<double, double> flow_span(std::size_t i) const {
        const std::size_t q = window_count();
        if (i > q) throw std::out_of_range("partition: flow interval index");
        const double s = (i == 0) ? 0.0 : release[i - 1];
        const double e = (i < q) ? onset[i] : horizon;
        return {s, e};
    }

    /// Reset window i = 1..q as (onset_i, release_i].
    std::pair<double, double> window_span(std::size_t i) const {
        if (i == 0 || i > window_count()) throw std::out_of_range("partition: impulse window index");
        return {onset[i - 1], release[i - 1]};
    }
};

/// Initial history on [-delay, 0].
struct HistoryFunction {
    std::function<SpectralVector(double)> value;
    double holder_exponent = 1.0;
};

/// Delayed forcing F(t, segment) with its declared regularity constants.
struct Nonlinearity {
    std::function<SpectralVector(double, const SegmentFn&)> value;
    double lipschitz = 0.0;        ///< bound on |F(t,x)-F(t,y)| / sup_theta |x-y|_alpha
    double holder_exponent = 1.0;  ///< time-regularity exponent entering the ledger
    double forcing_at_zero = 0.0;  ///< |F(0, 0)|
};

/// Reset map h_i(t, v) active on one window.
struct ImpulseMap {
    std::function<SpectralVector(double, const SpectralVector&)> value;
    double lipschitz = 0.0;      ///< joint Lipschitz constant in (t, v)
    double uniform_bound = 0.0;  ///< declared sup of |h_i(t, v)|_alpha
};

struct ProblemSpec {
    Spectrum spectrum;
    TimePartition partition;
    HistoryFunction history;
    Nonlinearity forcing;
    std::vector<ImpulseMap> impulses;

    void validate() const {
        partition.validate();
        if (impulses.size() != partition.window_count())
            throw std::invalid_argument("problem: need one impulse map per window, got " +
                                        std::to_string(impulses.size()) + " for " +
                                        std::to_string(partition.window_count()) + " windows");
        if (!history.value) throw std::invalid_argument("problem: history callable missing");
        if (!forcing.value) throw std::invalid_argument("problem: forcing callable missing");
        for (std::size_t i = 0; i < impulses.size(); ++i)
            if (!impulses[i].value)
                throw std::invalid_argument("problem: impulse map " + std::to_string(i + 1) + " callable missing");
    }

    double max_impulse_bound() const {
        double m = 0.0;
        for (const ImpulseMap& h : impulses) m = std::max(m, h.uniform_bound);
        return m;
    }
};

/// Solvability ledger.  Gates: every flow_contraction entry < 1 makes the
/// per-interval fixed point well posed inside a ball of radius ball_radius;
/// contraction_constant < 1 certifies the global estimates.  When a flow gate
/// fails the radius-dependent entries are NaN and the problem runs
/// uncertified.
struct AssumptionReport {
    double alpha = 0.5;
    double forcing_at_zero = 0.0;                ///< |F(0,0)|
    double history_sup_norm = 0.0;               ///< sup_theta |chi(theta)|_alpha
    double semigroup_gap = 0.0;                  ///< sup_t |(T(t)-I) chi(0)|_alpha
    std::vector<double> flow_contraction;        ///< Q_i, i = 0..q
    std::vector<double> absorption;              ///< N_i, i = 0..q
    std::vector<double> interval_contraction;    ///< E_i, i = 0..q
    double contraction_constant = 0.0;           ///< D = max(max_i E_i, max_i L_{h_i})
    double ball_radius = 0.0;                    ///< R
    double forcing_envelope = 0.0;               ///< L(R)
    std::vector<double> stage_bounds;            ///< per-stage graded bounds at beta = alpha
    double uniform_state_bound = 0.0;            ///< max over stages, history and impulses
    bool flow_gates_pass = false;
    bool contraction_gate_pass = false;

    bool certified() const { return flow_gates_pass && contraction_gate_pass; }
};

namespace detail {

inline double history_sup(const ProblemSpec& p, double exponent, std::size_t grid_points) {
    double s = 0.0;
    for (std::size_t k = 0; k < grid_points; ++k) {
        const double theta = -p.partition.delay +
                             (static_cast<double>(k) * p.partition.delay) / static_cast<double>(grid_points - 1);
        s = std::max(s, alpha_norm(p.spectrum, exponent, p.history.value(theta)));
    }
    return s;
}

}  // namespace detail

/// Assemble the constants ledger for the declared problem data.  Suprema over
/// time are taken on uniform grids with grid_points samples.
inline AssumptionReport compute_assumption_report(const ProblemSpec& p, double alpha,
                                                  const SemigroupBounds& bounds = diagonal_sharp_bounds(),
                                                  std::size_t grid_points = 1000) {
    p.validate();
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("compute_assumption_report: alpha must lie in (0, 1)");
    if (grid_points < 2) throw std::invalid_argument("compute_assumption_report: need at least 2 grid points");

    const TimePartition& part = p.partition;
    const std::size_t q = part.window_count();
    const double T = part.horizon;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    AssumptionReport r;
    r.alpha = alpha;
    r.forcing_at_zero = p.forcing.forcing_at_zero;
    r.history_sup_norm = detail::history_sup(p, alpha, grid_points);

    const SpectralVector chi0 = p.history.value(0.0);
    for (std::size_t k = 0; k < grid_points; ++k) {
        const double t = (static_cast<double>(k) * T) / static_cast<double>(grid_points - 1);
        r.semigroup_gap = std::max(r.semigroup_gap,
                                   alpha_norm(p.spectrum, alpha, semigroup_apply(p.spectrum, t, chi0) - chi0));
    }

    const double m_alpha = bounds.smoothing(alpha);
    const double M = bounds.uniform;
    const double impulse_bound = p.max_impulse_bound();
    const double time_term = std::pow(T, p.forcing.holder_exponent);
    const double envelope_at_history =
        p.forcing.lipschitz * (time_term + r.history_sup_norm) + r.forcing_at_zero;

    r.flow_contraction.resize(q + 1);
    r.absorption.resize(q + 1);
    r.interval_contraction.resize(q + 1);
    double max_impulse_lipschitz = 0.0;
    for (std::size_t i = 0; i <= q; ++i) {
        const double end = part.flow_span(i).second;
        const double kernel_mass = std::pow(end, 1.0 - alpha) / (1.0 - alpha);
        r.flow_contraction[i] = m_alpha * p.forcing.lipschitz * kernel_mass;
        if (i == 0) {
            r.absorption[0] = r.semigroup_gap + m_alpha * envelope_at_history * kernel_mass;
            r.interval_contraction[0] = r.flow_contraction[0];
        } else {
            r.absorption[i] = M * impulse_bound + r.history_sup_norm + m_alpha * envelope_at_history * kernel_mass;
            r.interval_contraction[i] = M * p.impulses[i - 1].lipschitz + r.flow_contraction[i];
            max_impulse_lipschitz = std::max(max_impulse_lipschitz, p.impulses[i - 1].lipschitz);
        }
    }

    r.contraction_constant =
        std::max(*std::max_element(r.interval_contraction.begin(), r.interval_contraction.end()),
                 max_impulse_lipschitz);
    r.flow_gates_pass = std::all_of(r.flow_contraction.begin(), r.flow_contraction.end(),
                                    [](double v) { return v < 1.0; });
    r.contraction_gate_pass = r.contraction_constant < 1.0;

    if (r.flow_gates_pass) {
        double absorbed = 0.0;
        for (std::size_t i = 0; i <= q; ++i)
            absorbed = std::max(absorbed, r.absorption[i] / (1.0 - r.flow_contraction[i]));
        r.ball_radius = std::max(absorbed, impulse_bound + r.history_sup_norm);
        r.forcing_envelope =
            p.forcing.lipschitz * (time_term + r.ball_radius + r.history_sup_norm) + r.forcing_at_zero;

        r.stage_bounds.resize(q + 1);
        for (std::size_t i = 0; i <= q; ++i) {
            const double end = part.flow_span(i).second;
            const double kernel_mass = std::pow(end, 1.0 - alpha) / (1.0 - alpha);
            const double head = (i == 0) ? M * r.history_sup_norm : M * impulse_bound;
            r.stage_bounds[i] = head + m_alpha * r.forcing_envelope * kernel_mass;
        }
        r.uniform_state_bound = std::max({r.history_sup_norm,
                                          *std::max_element(r.stage_bounds.begin(), r.stage_bounds.end()),
                                          impulse_bound});
    } else {
        r.ball_radius = nan;
        r.forcing_envelope = nan;
        r.uniform_state_bound = nan;
    }
    return r;
}

/// Graded sup bound for the approximants at an arbitrary exponent beta,
/// combining the history, impulse and flow stages exactly as the ledger does at
/// beta = alpha.  Requires a certified report (finite envelope).
inline double graded_state_bound(const ProblemSpec& p, double beta, const AssumptionReport& report,
                                 const SemigroupBounds& bounds = diagonal_sharp_bounds(),
                                 std::size_t grid_points = 1000) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("graded_state_bound: beta must lie in (0, 1)");
    if (!std::isfinite(report.forcing_envelope))
        throw std::domain_error("graded_state_bound: report has no finite forcing envelope");
    const double history_beta = detail::history_sup(p, beta, grid_points);
    const double m_beta = bounds.smoothing(beta);
    const double impulse_bound = p.max_impulse_bound();
    double bound = std::max(history_beta, impulse_bound);
    for (std::size_t i = 0; i <= p.partition.window_count(); ++i) {
        const double end = p.partition.flow_span(i).second;
        const double kernel_mass = std::pow(end, 1.0 - beta) / (1.0 - beta);
        const double head = (i == 0) ? bounds.uniform * history_beta : bounds.uniform * impulse_bound;
        bound = std::max(bound, head + m_beta * report.forcing_envelope * kernel_mass);
    }
    return bound;
}

/// Result of measuring a declared constant against sampled evaluations.
struct ConstantCheck {
    double declared = 0.0;
    double measured = 0.0;
    std::size_t samples = 0;
    bool pass = false;
};

/// Sample random affine segments and measure the forcing Lipschitz ratio
/// |F(t,x) - F(t,y)| / sup_theta |x - y|_alpha against the declared constant.
inline ConstantCheck validate_forcing_lipschitz(const ProblemSpec& p, double alpha, std::size_t pairs,
                                                std::uint64_t seed, double amplitude,
                                                std::size_t segment_modes = 16) {
    ConstantCheck c;
    c.declared = p.forcing.lipschitz;
    c.samples = pairs;
    SplitMix rng(seed);
    const double tau = p.partition.delay;
    for (std::size_t k = 0; k < pairs; ++k) {
        const double t = rng.uniform(0.0, p.partition.horizon);
        const SpectralVector a0 = rng.decaying_state(segment_modes, amplitude);
        const SpectralVector a1 = rng.decaying_state(segment_modes, amplitude);
        const SpectralVector b0 = rng.decaying_state(segment_modes, amplitude);
        const SpectralVector b1 = rng.decaying_state(segment_modes, amplitude);
        const auto affine = [tau](const SpectralVector& v0, const SpectralVector& v1, double theta) {
            const double w = -theta / tau;
            return v0 + (w * (v1 - v0));
        };
        const SegmentFn segx = [&](double theta) { return affine(a0, a1, theta); };
        const SegmentFn segy = [&](double theta) { return affine(b0, b1, theta); };
        const double gap = std::max(alpha_norm(p.spectrum, alpha, a0 - b0),
                                    alpha_norm(p.spectrum, alpha, a1 - b1));
        if (gap < 1e-14) continue;
        const double diff = alpha_norm(p.spectrum, 0.0, p.forcing.value(t, segx) - p.forcing.value(t, segy));
        c.measured = std::max(c.measured, diff / gap);
    }
    c.pass = c.measured <= c.declared * (1.0 + 1e-9);
    return c;
}

/// Random-state source for the impulse validators; when empty, the default
/// mode-decaying generator is used.  Maps with a restricted honest band (for
/// example pointwise sign conditions on the physical profile) supply their
/// own sampler.
using StateSampler = std::function<SpectralVector(SplitMix&)>;

/// Sample random state pairs inside one impulse window and measure the joint
/// Lipschitz ratio of the impulse map against its declared constant.
inline ConstantCheck validate_impulse_lipschitz(const ProblemSpec& p, std::size_t window, double alpha,
                                              std::size_t pairs, std::uint64_t seed, double amplitude,
                                              std::size_t modes = 16, const StateSampler& sampler = {}) {
    if (window == 0 || window > p.impulses.size())
        throw std::out_of_range("validate_impulse_lipschitz: window index");
    const ImpulseMap& h = p.impulses[window - 1];
    const auto [lo, hi] = p.partition.window_span(window);
    ConstantCheck c;
    c.declared = h.lipschitz;
    c.samples = pairs;
    SplitMix rng(seed);
    for (std::size_t k = 0; k < pairs; ++k) {
        const double t1 = rng.uniform(lo, hi);
        const double t2 = rng.uniform(lo, hi);
        const SpectralVector v = sampler ? sampler(rng) : rng.decaying_state(modes, amplitude);
        const SpectralVector w = sampler ? sampler(rng) : rng.decaying_state(modes, amplitude);
        const double gap = std::abs(t1 - t2) + alpha_norm(p.spectrum, alpha, v - w);
        if (gap < 1e-14) continue;
        const double diff = alpha_norm(p.spectrum, alpha, h.value(t1, v) - h.value(t2, w));
        c.measured = std::max(c.measured, diff / gap);
    }
    c.pass = c.measured <= c.declared * (1.0 + 1e-9);
    return c;
}

/// Sample states inside one impulse window and measure sup |h(t, v)|_alpha
/// against the declared uniform bound.
inline ConstantCheck validate_impulse_bound(const ProblemSpec& p, std::size_t window, double alpha,
                                          std::size_t pairs, std::uint64_t seed, double amplitude,
                                          std::size_t modes = 16, const StateSampler& sampler = {}) {
    if (window == 0 || window > p.impulses.size())
        throw std::out_of_range("validate_impulse_bound: window index");
    const ImpulseMap& h = p.impulses[window - 1];
    const auto [lo, hi] = p.partition.window_span(window);
    ConstantCheck c;
    c.declared = h.uniform_bound;
    c.samples = pairs;
    SplitMix rng(seed);
    for (std::size_t k = 0; k < pairs; ++k) {
        const double t = rng.uniform(lo, hi);
        const SpectralVector v = sampler ? sampler(rng) : rng.decaying_state(modes, amplitude);
        c.measured = std::max(c.measured, alpha_norm(p.spectrum, alpha, h.value(t, v)));
    }
    c.pass = c.measured <= c.declared * (1.0 + 1e-9);
    return c;
}

}  // namespace fglab
