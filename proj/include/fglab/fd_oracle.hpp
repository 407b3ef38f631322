#pragma once

// Independent cross-check for the heat instance: method-of-lines on a uniform
// spatial grid with second-order central differences, Crank-Nicolson for the
// diffusion, and the delayed convolution forcing averaged at both step
// endpoints (the delay makes both evaluations explicit).  Impulse windows are
// prescribed pointwise with the sine impulse formula written out directly, so
// no code is shared with the spectral evaluation path.  The spatial
// convolution is a Toeplitz product computed through a circulant FFT
// embedding.
//
// Plan creation makes this constructor-serial: run oracles one at a time or
// guard construction externally.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "fglab/heat1d.hpp"
#include "fglab/problem.hpp"

namespace fglab {

struct FdConfig {
    std::size_t grid_points = 2000;      ///< spatial intervals; interior unknowns are grid_points - 1
    double dt = 1e-4;                    ///< requested step; horizon and events must sit on the grid
    std::vector<double> snapshot_times;  ///< captured at the nearest node; the horizon is always captured
    double blowup = 1e8;                 ///< instability guard on max |w|
};

struct FdSolution {
    std::vector<double> xi;                   ///< interior positions
    std::vector<double> times;                ///< realized snapshot times
    std::vector<std::vector<double>> values;  ///< one row per snapshot
    std::size_t steps = 0;
    double dt = 0.0;

    const std::vector<double>& at(double t) const {
        for (std::size_t i = 0; i < times.size(); ++i)
            if (std::abs(times[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return values[i];
        throw std::out_of_range("no snapshot captured at the requested time");
    }
};

namespace detail {

// Circulant embedding of the convolution c_i = sum_j f((i-j)h) w_j h over the
// interior nodes.  The kernel transform is fixed at construction; each apply
// costs one forward and one inverse transform.
class ToeplitzConvolver {
  public:
    ToeplitzConvolver(const std::function<double(double)>& kernel, std::size_t unknowns, double h)
        : m_(unknowns) {
        std::size_t len = 1;
        while (len < 2 * m_) len *= 2;
        len_ = len;
        real_ = fftw_alloc_real(len_);
        spec_ = fftw_alloc_complex(len_ / 2 + 1);
        kernel_spec_ = fftw_alloc_complex(len_ / 2 + 1);
        forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(len_), real_, spec_, FFTW_ESTIMATE);
        inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(len_), spec_, real_, FFTW_ESTIMATE);

        std::fill(real_, real_ + len_, 0.0);
        for (std::size_t r = 0; r < m_; ++r) real_[r] = kernel(static_cast<double>(r) * h) * h;
        for (std::size_t r = 1; r < m_; ++r) real_[len_ - r] = kernel(-static_cast<double>(r) * h) * h;
        fftw_execute(forward_);
        for (std::size_t i = 0; i < len_ / 2 + 1; ++i) {
            kernel_spec_[i][0] = spec_[i][0];
            kernel_spec_[i][1] = spec_[i][1];
        }
    }

    ToeplitzConvolver(const ToeplitzConvolver&) = delete;
    ToeplitzConvolver& operator=(const ToeplitzConvolver&) = delete;

    ~ToeplitzConvolver() {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(inverse_);
        fftw_free(real_);
        fftw_free(spec_);
        fftw_free(kernel_spec_);
    }

    void apply(const std::vector<double>& w, std::vector<double>& out) {
        std::fill(real_, real_ + len_, 0.0);
        std::copy(w.begin(), w.end(), real_);
        fftw_execute(forward_);
        const double scale = 1.0 / static_cast<double>(len_);
        for (std::size_t i = 0; i < len_ / 2 + 1; ++i) {
            const double re = spec_[i][0] * kernel_spec_[i][0] - spec_[i][1] * kernel_spec_[i][1];
            const double im = spec_[i][0] * kernel_spec_[i][1] + spec_[i][1] * kernel_spec_[i][0];
            spec_[i][0] = re * scale;
            spec_[i][1] = im * scale;
        }
        fftw_execute(inverse_);
        out.assign(real_, real_ + m_);
    }

  private:
    std::size_t m_;
    std::size_t len_;
    double* real_;
    fftw_complex* spec_;
    fftw_complex* kernel_spec_;
    fftw_plan forward_;
    fftw_plan inverse_;
};

// Constant-coefficient Thomas solve for (1 + 2r) on the diagonal and -r off
// it; the elimination multipliers are precomputed.
class TridiagonalSolver {
  public:
    TridiagonalSolver(std::size_t unknowns, double r) : r_(r), upper_(unknowns) {
        double diag = 1.0 + 2.0 * r;
        upper_[0] = -r / diag;
        diag_inv_.push_back(1.0 / diag);
        for (std::size_t i = 1; i < unknowns; ++i) {
            diag = (1.0 + 2.0 * r) + r * upper_[i - 1];
            upper_[i] = -r / diag;
            diag_inv_.push_back(1.0 / diag);
        }
    }

    void solve(std::vector<double>& rhs) const {
        const std::size_t n = rhs.size();
        rhs[0] *= diag_inv_[0];
        for (std::size_t i = 1; i < n; ++i) rhs[i] = (rhs[i] + r_ * rhs[i - 1]) * diag_inv_[i];
        for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= upper_[i] * rhs[i + 1];
    }

  private:
    double r_;
    std::vector<double> upper_;
    std::vector<double> diag_inv_;
};

}  // namespace detail

/// The explicit forcing treatment blew up; distinct from validation errors
/// so drivers can report non-convergence.
class OracleInstability : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Physical-grid L2 distance between a captured row and a spectral state,
// sqrt(h sum (w_i - u(x_i))^2): the grid quadrature of the squared L2
// distance, which matches the coefficient l2 norm by Parseval.
inline double l2_distance_at(const FdSolution& fd, double t, const SpectralVector& v) {
    const std::vector<double>& row = fd.at(t);
    const double h = fd.xi.empty() ? 0.0 : fd.xi.front();
    double acc = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        const double d = row[i] - eval_physical(v, fd.xi[i]);
        acc += d * d;
    }
    return std::sqrt(h * acc);
}

inline FdSolution fd_oracle(const HeatInstance& inst, const TimePartition& part, const HistoryFunction& history,
                            const FdConfig& cfg) {
    part.validate();
    if (!history.value) throw std::invalid_argument("finite-difference oracle needs a history function");
    if (cfg.grid_points < 100) throw std::invalid_argument("finite-difference oracle needs at least 100 grid points");
    if (cfg.dt <= 0.0) throw std::invalid_argument("time step must be positive");
    if (cfg.dt > part.delay) throw std::invalid_argument("time step must not exceed the delay");

    const double horizon = part.horizon;
    const double raw_steps = horizon / cfg.dt;
    const double rounded = std::round(raw_steps);
    if (std::abs(raw_steps - rounded) > 1e-6 * rounded)
        throw std::invalid_argument("time step must divide the horizon");
    const std::size_t steps = static_cast<std::size_t>(rounded);
    const auto node_time = [horizon, steps](std::size_t k) {
        return (static_cast<double>(k) * horizon) / static_cast<double>(steps);
    };
    const double dt = horizon / static_cast<double>(steps);

    const auto node_index = [&](double t, const char* what) {
        const double pos = t / dt;
        const double idx = std::round(pos);
        if (std::abs(pos - idx) > 1e-6)
            throw std::invalid_argument(std::string("time step must resolve the partition at the ") + what);
        return static_cast<std::size_t>(idx);
    };

    const std::size_t n = cfg.grid_points;
    const std::size_t m = n - 1;
    const double h = 1.0 / static_cast<double>(n);

    std::vector<double> xi(m);
    for (std::size_t i = 0; i < m; ++i) xi[i] = static_cast<double>(i + 1) * h;

    const auto history_row = [&](double theta) {
        const SpectralVector v = history.value(std::max(theta, -part.delay));
        std::vector<double> row(m);
        for (std::size_t i = 0; i < m; ++i) row[i] = eval_physical(v, xi[i]);
        return row;
    };

    // Ring buffer holding enough trailing rows to serve every delayed lookup.
    const std::size_t span = static_cast<std::size_t>(std::ceil(part.delay / dt)) + 3;
    std::vector<std::vector<double>> ring(span);
    const auto delayed_row = [&](double t, std::size_t current) -> std::vector<double> {
        const double s = t - part.delay;
        if (s <= 0.0) return history_row(s);
        const double pos = s / dt;
        std::size_t k0 = static_cast<std::size_t>(pos);
        if (k0 >= current) k0 = current - 1;
        const double frac = pos - static_cast<double>(k0);
        const std::vector<double>& lo = ring[k0 % span];
        const std::vector<double>& hi = ring[(k0 + 1) % span];
        std::vector<double> row(m);
        for (std::size_t i = 0; i < m; ++i) row[i] = (1.0 - frac) * lo[i] + frac * hi[i];
        return row;
    };

    detail::ToeplitzConvolver convolver(inst.kernel, m, h);
    const double r = dt / (2.0 * h * h);
    const detail::TridiagonalSolver cn(m, r);

    std::vector<double> conv(m);
    const auto forcing_row = [&](std::size_t k, std::vector<double>& out) {
        const std::vector<double> delayed = delayed_row(node_time(k), k);
        convolver.apply(delayed, conv);
        const double b = inst.beta(node_time(k));
        out.resize(m);
        for (std::size_t i = 0; i < m; ++i) out[i] = b * conv[i];
    };

    // Snapshot bookkeeping: requested times plus the horizon, mapped to nodes.
    std::vector<std::size_t> snap_nodes;
    for (double t : cfg.snapshot_times) {
        const double pos = std::min(std::max(t / dt, 0.0), static_cast<double>(steps));
        snap_nodes.push_back(static_cast<std::size_t>(std::round(pos)));
    }
    snap_nodes.push_back(steps);
    std::sort(snap_nodes.begin(), snap_nodes.end());
    snap_nodes.erase(std::unique(snap_nodes.begin(), snap_nodes.end()), snap_nodes.end());

    FdSolution sol;
    sol.xi = xi;
    sol.steps = steps;
    sol.dt = dt;

    std::vector<double> state = history_row(0.0);
    ring[0] = state;
    const auto capture = [&](std::size_t k) {
        if (std::binary_search(snap_nodes.begin(), snap_nodes.end(), k)) {
            sol.times.push_back(node_time(k));
            sol.values.push_back(state);
        }
    };
    capture(0);

    std::vector<double> g_now(m), g_next(m), rhs(m), left_row;
    forcing_row(0, g_now);

    std::size_t consumed = 0;  // windows fully traversed
    std::size_t window = 0;    // 1-based index of the active window, 0 in flow
    std::size_t release_node = 0;
    std::size_t next_onset = part.window_count() > 0 ? node_index(part.onset[0], "window onset") : steps + 1;

    for (std::size_t k = 0; k < steps; ++k) {
        const std::size_t k1 = k + 1;
        if (window > 0) {
            // prescribed interval (onset, release]
            const double t = node_time(k1);
            const double wave = std::sin(static_cast<double>(window) * t) / 3.0;
            for (std::size_t i = 0; i < m; ++i) {
                const double u = left_row[i];
                if (u <= -2.0)
                    throw std::domain_error("impulse map singular: physical state reaches -2 on the grid");
                state[i] = wave * u + u / (2.0 + u);
            }
            if (k1 == release_node) {
                forcing_row(k1, g_now);  // flow restarts from the prescription
                ++consumed;
                window = 0;
                next_onset =
                    consumed < part.window_count() ? node_index(part.onset[consumed], "window onset") : steps + 1;
            }
        } else {
            forcing_row(k1, g_next);
            for (std::size_t i = 0; i < m; ++i) {
                const double lap = (i > 0 ? state[i - 1] : 0.0) - 2.0 * state[i] + (i + 1 < m ? state[i + 1] : 0.0);
                rhs[i] = state[i] + r * lap + 0.5 * dt * (g_now[i] + g_next[i]);
            }
            cn.solve(rhs);
            state.swap(rhs);
            g_now.swap(g_next);
            if (k1 == next_onset) {
                window = consumed + 1;
                release_node = node_index(part.release[consumed], "window release");
                left_row = state;
            }
        }
        ring[k1 % span] = state;
        capture(k1);

        if (k1 % 64 == 0 || k1 == steps) {
            double peak = 0.0;
            for (double vi : state) peak = std::max(peak, std::abs(vi));
            if (!std::isfinite(peak) || peak > cfg.blowup)
                throw OracleInstability("finite-difference oracle unstable: reduce the time step");
        }
    }
    return sol;
}

}  // namespace fglab
