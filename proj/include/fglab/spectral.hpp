#pragma once

// Diagonal spectral calculus for a positive self-adjoint operator A with
// compact resolvent.  Everything is expressed in the eigenbasis:
//
//     A phi_j = lambda_j phi_j,      0 < lambda_0 <= lambda_1 <= ...
//
// A state is a finite coefficient vector (a_j).  The analytic semigroup
// generated by -A, the fractional powers A^alpha and the graded norms
//
//     |v|_alpha = ( sum_j lambda_j^{2 alpha} a_j^2 )^{1/2}
//
// all act diagonally, so the operator-norm bounds used by the solver can be
// checked exactly as maxima over the stored modes.  For this diagonal class
// the classical semigroup constants are sharp:
//
//     |T(t)|            <= 1                                  (M      = 1)
//     |A^a T(t)|        <= (a/e)^a t^{-a}                     (M_a    = (a/e)^a)
//     |(T(d)-I) A^-nu|  <= d^nu                               (M'_nu  = 1)
//
// since max_{x>0} x^a e^{-x t} = (a/(e t))^a and 1-e^{-x} <= x^nu for x >= 0,
// nu in (0,1].

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fglab {

/// Coefficient vector in the eigenbasis.  Indices past coeffs.size() are
/// implicitly zero, so vectors of different lengths mix freely.
struct SpectralVector {
    std::vector<double> coeffs;

    SpectralVector() = default;
    explicit SpectralVector(std::vector<double> c) : coeffs(std::move(c)) {}

    static SpectralVector zero(std::size_t n) { return SpectralVector(std::vector<double>(n, 0.0)); }

    /// Unit basis mode j, optionally scaled.
    static SpectralVector unit(std::size_t j, double scale = 1.0) {
        SpectralVector v = zero(j + 1);
        v.coeffs[j] = scale;
        return v;
    }

    std::size_t size() const { return coeffs.size(); }

    double operator[](std::size_t j) const { return j < coeffs.size() ? coeffs[j] : 0.0; }
};

inline SpectralVector operator+(const SpectralVector& a, const SpectralVector& b) {
    SpectralVector r = SpectralVector::zero(std::max(a.size(), b.size()));
    for (std::size_t j = 0; j < r.size(); ++j) r.coeffs[j] = a[j] + b[j];
    return r;
}

inline SpectralVector operator-(const SpectralVector& a, const SpectralVector& b) {
    SpectralVector r = SpectralVector::zero(std::max(a.size(), b.size()));
    for (std::size_t j = 0; j < r.size(); ++j) r.coeffs[j] = a[j] - b[j];
    return r;
}

inline SpectralVector operator*(double s, const SpectralVector& v) {
    SpectralVector r = v;
    for (double& c : r.coeffs) c *= s;
    return r;
}

/// acc += w * v, growing acc as needed.
inline void add_scaled(SpectralVector& acc, double w, const SpectralVector& v) {
    if (acc.size() < v.size()) acc.coeffs.resize(v.size(), 0.0);
    for (std::size_t j = 0; j < v.size(); ++j) acc.coeffs[j] += w * v.coeffs[j];
}

/// Eigenvalue sequence of A, truncated at a finite resolution.
class Spectrum {
public:
    explicit Spectrum(std::vector<double> eigenvalues) : lambda_(std::move(eigenvalues)) {
        if (lambda_.empty()) throw std::invalid_argument("spectrum: no eigenvalues");
        if (lambda_.front() <= 0.0) throw std::invalid_argument("spectrum: eigenvalues must be positive");
        for (std::size_t j = 1; j < lambda_.size(); ++j)
            if (lambda_[j] < lambda_[j - 1])
                throw std::invalid_argument("spectrum: eigenvalues must be nondecreasing");
    }

    /// Tabulate eigenvalues from an index rule.
    static Spectrum from_rule(const std::function<double(std::size_t)>& rule, std::size_t count) {
        std::vector<double> l(count);
        for (std::size_t j = 0; j < count; ++j) l[j] = rule(j);
        return Spectrum(std::move(l));
    }

    std::size_t size() const { return lambda_.size(); }

    double operator[](std::size_t j) const {
        if (j >= lambda_.size()) throw std::out_of_range("spectrum: mode index " + std::to_string(j));
        return lambda_[j];
    }

    const std::vector<double>& eigenvalues() const { return lambda_; }

private:
    std::vector<double> lambda_;
};

namespace detail {
inline void require_resolved(const Spectrum& sp, const SpectralVector& v, const char* op) {
    if (v.size() > sp.size())
        throw std::invalid_argument(std::string(op) + ": vector has more modes than the spectrum resolves");
}
}  // namespace detail

/// T(t) v with T(t) = exp(-t A); t must be nonnegative.
inline SpectralVector semigroup_apply(const Spectrum& sp, double t, const SpectralVector& v) {
    if (!(t >= 0.0)) throw std::domain_error("semigroup_apply: negative time");
    detail::require_resolved(sp, v, "semigroup_apply");
    SpectralVector r = v;
    for (std::size_t j = 0; j < r.size(); ++j) r.coeffs[j] *= std::exp(-sp.eigenvalues()[j] * t);
    return r;
}

/// A^alpha v for alpha in [0, 1]; other exponents are rejected so that the
/// caller cannot silently leave the fractional scale the solver works on.
inline SpectralVector fractional_power_apply(const Spectrum& sp, double alpha, const SpectralVector& v) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::domain_error("fractional_power_apply: exponent outside [0, 1]");
    detail::require_resolved(sp, v, "fractional_power_apply");
    SpectralVector r = v;
    for (std::size_t j = 0; j < r.size(); ++j) r.coeffs[j] *= std::pow(sp.eigenvalues()[j], alpha);
    return r;
}

/// Graded norm |v|_alpha.  Any real exponent is accepted here; negative
/// exponents arise in tail bounds and are well defined diagonally.
inline double alpha_norm(const Spectrum& sp, double alpha, const SpectralVector& v) {
    detail::require_resolved(sp, v, "alpha_norm");
    double s = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double w = std::pow(sp.eigenvalues()[j], alpha) * v.coeffs[j];
        s += w * w;
    }
    return std::sqrt(s);
}

/// Orthogonal projection onto span{phi_0, ..., phi_n}.
inline SpectralVector project(std::size_t n, SpectralVector v) {
    if (v.coeffs.size() > n + 1) v.coeffs.resize(n + 1);
    return v;
}

/// Sharp constants for the diagonal semigroup bounds quoted at the top of
/// this header.  smoothing(a) = (a/e)^a covers both |A^a T(t)| and the mixed
/// bound at exponent a = alpha + nu.
struct SemigroupBounds {
    double uniform = 1.0;

    double smoothing(double a) const {
        if (!(a >= 0.0 && a < 1.0)) throw std::domain_error("SemigroupBounds::smoothing: exponent outside [0, 1)");
        return a == 0.0 ? uniform : std::pow(a / std::exp(1.0), a);
    }

    double increment(double nu) const {
        if (!(nu > 0.0 && nu <= 1.0)) throw std::domain_error("SemigroupBounds::increment: exponent outside (0, 1]");
        return 1.0;
    }
};

inline SemigroupBounds diagonal_sharp_bounds() { return SemigroupBounds{}; }

/// One probe point for the operator-norm checks.
struct OperatorBoundSample {
    double t;      ///< semigroup time, > 0
    double delta;  ///< increment width, > 0
    double alpha;  ///< smoothing exponent, in [0, 1)
    double nu;     ///< increment exponent, in (0, 1], with alpha + nu < 1
};

struct OperatorBoundEntry {
    OperatorBoundSample sample;
    double smoothing_lhs, smoothing_rhs, smoothing_ratio;  ///< |A^a T(t)| vs M_a t^-a
    double increment_lhs, increment_rhs, increment_ratio;  ///< |(T(d)-I) A^-nu| vs M'_nu d^nu
    double mixed_lhs, mixed_rhs, mixed_ratio;              ///< |(T(d)-I) A^a T(t)| vs M'_nu M_{a+nu} d^nu t^-(a+nu)
    bool violated;
};

struct OperatorBoundReport {
    std::vector<OperatorBoundEntry> entries;
    double worst_ratio = 0.0;
    bool all_hold = true;
};

/// Evaluate the three operator-norm inequalities exactly (diagonal maxima
/// over the stored modes) at each sample and compare against the declared
/// constants.  Ratios are lhs/rhs; any ratio above 1 flags a violation.
inline OperatorBoundReport check_operator_bounds(const Spectrum& sp, const SemigroupBounds& bounds,
                                                 const std::vector<OperatorBoundSample>& samples) {
    OperatorBoundReport report;
    report.entries.reserve(samples.size());
    for (const OperatorBoundSample& s : samples) {
        if (!(s.t > 0.0) || !(s.delta > 0.0))
            throw std::domain_error("check_operator_bounds: t and delta must be positive");
        if (!(s.alpha >= 0.0 && s.alpha < 1.0) || !(s.nu > 0.0 && s.nu <= 1.0) || !(s.alpha + s.nu < 1.0))
            throw std::domain_error("check_operator_bounds: need alpha in [0,1), nu in (0,1], alpha+nu < 1");

        OperatorBoundEntry e;
        e.sample = s;
        double sm = 0.0, inc = 0.0, mix = 0.0;
        for (double l : sp.eigenvalues()) {
            sm = std::max(sm, std::pow(l, s.alpha) * std::exp(-l * s.t));
            const double gap = 1.0 - std::exp(-l * s.delta);
            inc = std::max(inc, gap * std::pow(l, -s.nu));
            mix = std::max(mix, gap * std::pow(l, s.alpha) * std::exp(-l * s.t));
        }
        e.smoothing_lhs = sm;
        e.smoothing_rhs = bounds.smoothing(s.alpha) * std::pow(s.t, -s.alpha);
        e.increment_lhs = inc;
        e.increment_rhs = bounds.increment(s.nu) * std::pow(s.delta, s.nu);
        e.mixed_lhs = mix;
        e.mixed_rhs = bounds.increment(s.nu) * bounds.smoothing(s.alpha + s.nu) * std::pow(s.delta, s.nu) *
                      std::pow(s.t, -(s.alpha + s.nu));
        e.smoothing_ratio = e.smoothing_lhs / e.smoothing_rhs;
        e.increment_ratio = e.increment_lhs / e.increment_rhs;
        e.mixed_ratio = e.mixed_lhs / e.mixed_rhs;
        e.violated = e.smoothing_ratio > 1.0 || e.increment_ratio > 1.0 || e.mixed_ratio > 1.0;

        report.worst_ratio = std::max({report.worst_ratio, e.smoothing_ratio, e.increment_ratio, e.mixed_ratio});
        report.all_hold = report.all_hold && !e.violated;
        report.entries.push_back(e);
    }
    return report;
}

/// How close |A^a T(t)| comes to its bound M_a t^-a over a time grid; the
/// supremum over all t > 0 equals 1 for a spectrum dense enough near a/t.
inline double smoothing_bound_tightness(const Spectrum& sp, const SemigroupBounds& bounds, double alpha,
                                        const std::vector<double>& t_grid) {
    double best = 0.0;
    for (double t : t_grid) {
        if (!(t > 0.0)) throw std::domain_error("smoothing_bound_tightness: t must be positive");
        double lhs = 0.0;
        for (double l : sp.eigenvalues()) lhs = std::max(lhs, std::pow(l, alpha) * std::exp(-l * t));
        best = std::max(best, lhs * std::pow(t, alpha) / bounds.smoothing(alpha));
    }
    return best;
}

}  // namespace fglab
