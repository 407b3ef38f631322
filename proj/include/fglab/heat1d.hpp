#pragma once

// One-dimensional Dirichlet heat instance: eigenvalues (j+1)^2 pi^2 with
// eigenfunctions sqrt(2) sin((j+1) pi xi), a convolution-in-space forcing
// driven by the delayed state, an arctan particular case, and the sine
// impulse maps. Physical-space evaluation runs through a uniform interior
// grid whose discrete sine transform is exactly orthogonal.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "fglab/problem.hpp"
#include "fglab/spectral.hpp"

namespace fglab {

inline Spectrum dirichlet_spectrum(std::size_t modes) {
    return Spectrum::from_rule([](std::size_t j) {
        const double k = static_cast<double>(j + 1);
        return k * k * M_PI * M_PI;
    }, modes);
}

// Pointwise synthesis at an arbitrary position.
inline double eval_physical(const SpectralVector& v, double xi) {
    if (xi < 0.0 || xi > 1.0) throw std::domain_error("physical evaluation outside [0,1]");
    double acc = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j)
        acc += v[j] * M_SQRT2 * std::sin(static_cast<double>(j + 1) * M_PI * xi);
    return acc;
}

// Uniform interior grid xi_a = a/G, a = 1..G-1. The discrete sine transform
// on this grid is exactly orthogonal: sum_a psi_j(xi_a) psi_k(xi_a) = G
// delta_jk for mode numbers j+1, k+1 <= G-1, so analyze() inverts
// synthesize() to machine precision for resolved modes.
class SineGrid {
  public:
    explicit SineGrid(std::size_t points = 512) : points_(points) {
        if (points_ < 4) throw std::invalid_argument("sine grid needs at least 4 points");
        table_.resize(2 * points_);
        for (std::size_t m = 0; m < 2 * points_; ++m)
            table_[m] = std::sin(M_PI * static_cast<double>(m) / static_cast<double>(points_));
    }

    std::size_t points() const { return points_; }
    std::size_t size() const { return points_ - 1; }  // interior nodes
    double position(std::size_t k) const { return static_cast<double>(k + 1) / static_cast<double>(points_); }

    std::vector<double> synthesize(const SpectralVector& v) const {
        std::vector<double> u(size(), 0.0);
        for (std::size_t j = 0; j < v.size(); ++j) {
            const double c = v[j] * M_SQRT2;
            if (c == 0.0) continue;
            const std::size_t freq = j + 1;
            for (std::size_t a = 1; a < points_; ++a)
                u[a - 1] += c * table_[(freq * a) % (2 * points_)];
        }
        return u;
    }

    SpectralVector analyze(const std::vector<double>& u, std::size_t modes) const {
        if (u.size() != size()) throw std::invalid_argument("grid value count does not match the grid");
        if (modes > size()) throw std::invalid_argument("requested modes exceed the grid resolution");
        SpectralVector out = SpectralVector::zero(modes);
        const double scale = M_SQRT2 / static_cast<double>(points_);
        for (std::size_t j = 0; j < modes; ++j) {
            const std::size_t freq = j + 1;
            double acc = 0.0;
            for (std::size_t a = 1; a < points_; ++a)
                acc += u[a - 1] * table_[(freq * a) % (2 * points_)];
            out.coeffs[j] = scale * acc;
        }
        return out;
    }

  private:
    std::size_t points_;
    std::vector<double> table_;  // sin(pi m / points), m = 0..2*points-1
};

namespace detail {

// 16-point Gauss-Legendre rule on [-1,1], positive half (symmetric).
struct Gauss16 {
    static constexpr std::array<double, 8> nodes = {
        0.09501250983763744,  0.28160355077925891, 0.45801677765722739, 0.61787624440264375,
        0.75540440835500303,  0.86563120238783174, 0.94457502307323258, 0.98940093499164993};
    static constexpr std::array<double, 8> weights = {
        0.18945061045506850,  0.18260341504492359, 0.16915651939500254, 0.14959598881657673,
        0.12462897125553387,  0.095158511682492785, 0.062253523938647893, 0.027152459411754095};
};

struct QuadratureGrid {
    std::vector<double> x;
    std::vector<double> w;
};

// Composite 16-point Gauss rule over [0,1] split into equal panels.
inline QuadratureGrid composite_gauss(std::size_t panels) {
    if (panels == 0) throw std::invalid_argument("composite quadrature needs at least one panel");
    QuadratureGrid q;
    q.x.reserve(16 * panels);
    q.w.reserve(16 * panels);
    const double width = 1.0 / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double center = (static_cast<double>(p) + 0.5) * width;
        const double half = 0.5 * width;
        for (std::size_t i = 0; i < 8; ++i) {
            q.x.push_back(center - half * Gauss16::nodes[7 - i]);
            q.w.push_back(half * Gauss16::weights[7 - i]);
        }
        for (std::size_t i = 0; i < 8; ++i) {
            q.x.push_back(center + half * Gauss16::nodes[i]);
            q.w.push_back(half * Gauss16::weights[i]);
        }
    }
    return q;
}

}  // namespace detail

// Precomputed instance data: bilinear sine coefficients of the convolution
// kernel, K_jk = int int f(xi - s) psi_j(xi) psi_k(s) ds dxi, and the kernel's
// L2 norm Theta over the unit square.
struct HeatInstance {
    std::function<double(double)> kernel;
    std::function<double(double)> beta;
    std::size_t kernel_modes = 0;
    SineGrid grid{512};
    std::vector<double> kernel_matrix;  // kernel_modes x kernel_modes, row-major
    double theta = 0.0;

    double kernel_entry(std::size_t j, std::size_t k) const {
        if (j >= kernel_modes || k >= kernel_modes) throw std::out_of_range("kernel matrix index");
        return kernel_matrix[j * kernel_modes + k];
    }

    // K applied to the leading coefficients of x; output carries kernel_modes modes.
    SpectralVector apply_kernel(const SpectralVector& x) const {
        SpectralVector out = SpectralVector::zero(kernel_modes);
        const std::size_t cols = std::min(kernel_modes, x.size());
        for (std::size_t j = 0; j < kernel_modes; ++j) {
            double acc = 0.0;
            const double* row = kernel_matrix.data() + j * kernel_modes;
            for (std::size_t k = 0; k < cols; ++k) acc += row[k] * x[k];
            out.coeffs[j] = acc;
        }
        return out;
    }
};

using HeatInstancePtr = std::shared_ptr<const HeatInstance>;

// Builds the kernel matrix and Theta with a composite Gauss rule sized to
// resolve every represented mode with margin.
inline HeatInstancePtr make_heat_instance(std::function<double(double)> kernel,
                                          std::function<double(double)> beta,
                                          std::size_t kernel_modes = 65,
                                          std::size_t grid_points = 512) {
    if (!kernel || !beta) throw std::invalid_argument("heat instance needs kernel and coefficient callables");
    if (kernel_modes == 0) throw std::invalid_argument("heat instance needs at least one kernel mode");
    if (grid_points < 2 * kernel_modes)
        throw std::invalid_argument("sine grid must hold at least twice the kernel modes");

    auto inst = std::make_shared<HeatInstance>();
    inst->kernel = kernel;
    inst->beta = std::move(beta);
    inst->kernel_modes = kernel_modes;
    inst->grid = SineGrid(grid_points);

    const std::size_t panels = (2 * kernel_modes + 2) / 3 + 8;
    const detail::QuadratureGrid q = detail::composite_gauss(panels);
    const std::size_t nq = q.x.size();

    // B[j][a] = psi_j(x_a) w_a
    std::vector<double> basis(kernel_modes * nq);
    for (std::size_t j = 0; j < kernel_modes; ++j)
        for (std::size_t a = 0; a < nq; ++a)
            basis[j * nq + a] = M_SQRT2 * std::sin(static_cast<double>(j + 1) * M_PI * q.x[a]) * q.w[a];

    // Row-by-row contraction against the kernel, accumulating Theta^2 alongside.
    std::vector<double> mixed(nq * kernel_modes, 0.0);  // T[a][k] = sum_b f(x_a-x_b) B[k][b]
    double theta_sq = 0.0;
    std::vector<double> row(nq);
    for (std::size_t a = 0; a < nq; ++a) {
        for (std::size_t b = 0; b < nq; ++b) {
            row[b] = kernel(q.x[a] - q.x[b]);
            theta_sq += q.w[a] * q.w[b] * row[b] * row[b];
        }
        for (std::size_t k = 0; k < kernel_modes; ++k) {
            double acc = 0.0;
            const double* bk = basis.data() + k * nq;
            for (std::size_t b = 0; b < nq; ++b) acc += row[b] * bk[b];
            mixed[a * kernel_modes + k] = acc;
        }
    }
    inst->theta = std::sqrt(theta_sq);

    inst->kernel_matrix.assign(kernel_modes * kernel_modes, 0.0);
    for (std::size_t j = 0; j < kernel_modes; ++j)
        for (std::size_t a = 0; a < nq; ++a) {
            const double bja = basis[j * nq + a];
            const double* ta = mixed.data() + a * kernel_modes;
            double* kj = inst->kernel_matrix.data() + j * kernel_modes;
            for (std::size_t k = 0; k < kernel_modes; ++k) kj[k] += bja * ta[k];
        }
    return inst;
}

// Delayed convolution forcing: beta(t) K seg(-delay). The declared Lipschitz
// constant is sup|beta| Theta / pi, the operator-norm bound of K against the
// graded norm of the argument (1/pi = first eigenvalue^{-1/2}).
inline Nonlinearity convolution_nonlinearity(HeatInstancePtr inst, double delay, double horizon) {
    if (!inst) throw std::invalid_argument("heat instance is null");
    if (delay <= 0.0 || horizon <= 0.0) throw std::invalid_argument("delay and horizon must be positive");
    double beta_sup = 0.0;
    for (std::size_t k = 0; k <= 2000; ++k)
        beta_sup = std::max(beta_sup, std::abs(inst->beta(horizon * static_cast<double>(k) / 2000.0)));

    Nonlinearity f;
    f.value = [inst, delay](double t, const SegmentFn& seg) {
        return inst->beta(t) * inst->apply_kernel(seg(-delay));
    };
    f.lipschitz = beta_sup * inst->theta / M_PI;
    f.holder_exponent = 1.0;
    f.forcing_at_zero = 0.0;  // K applied to the zero state vanishes
    return f;
}

// Particular case: a separable time kernel integrated in space against
// arctan of the delayed physical state. The s-integral is scalar; it is
// evaluated on a composite Gauss grid (spectrally accurate, so doubling the
// physical resolution leaves the value fixed), and the constant result is
// expanded with the exact sine coefficients 2 sqrt(2) / ((j+1) pi) of the
// unit profile.
inline Nonlinearity arctan_nonlinearity(HeatInstancePtr inst, std::function<double(double, double)> time_kernel,
                                        double kernel_sup, double delay, std::size_t out_modes) {
    if (!inst) throw std::invalid_argument("heat instance is null");
    if (!time_kernel) throw std::invalid_argument("time kernel callable is empty");
    if (delay <= 0.0) throw std::invalid_argument("delay must be positive");
    if (out_modes == 0) throw std::invalid_argument("arctan forcing needs at least one output mode");

    const std::size_t panels = std::max<std::size_t>(8, inst->grid.points() / 64);
    auto quad = std::make_shared<const detail::QuadratureGrid>(detail::composite_gauss(panels));

    Nonlinearity f;
    f.value = [quad, time_kernel, delay, out_modes](double t, const SegmentFn& seg) {
        const SpectralVector x = seg(-delay);
        double integral = 0.0;
        for (std::size_t a = 0; a < quad->x.size(); ++a)
            integral += quad->w[a] * time_kernel(t, quad->x[a]) * std::atan(eval_physical(x, quad->x[a]));
        SpectralVector out = SpectralVector::zero(out_modes);
        for (std::size_t j = 0; j < out_modes; j += 2)
            out.coeffs[j] = integral * 2.0 * M_SQRT2 / (static_cast<double>(j + 1) * M_PI);
        return out;
    };
    f.lipschitz = kernel_sup / M_PI;  // arctan is 1-Lipschitz; 1/pi converts the graded argument norm
    f.holder_exponent = 1.0;
    f.forcing_at_zero = 0.0;
    return f;
}

// Window map u -> sin(i t)/3 u + u/(2+u) applied pointwise on the grid.
inline SpectralVector impulse_image(const SineGrid& grid, std::size_t index, double t, const SpectralVector& v,
                                    std::size_t out_modes) {
    std::vector<double> u = grid.synthesize(v);
    const double wave = std::sin(static_cast<double>(index) * t) / 3.0;
    for (double& s : u) {
        if (s <= -2.0)
            throw std::domain_error("impulse map singular: physical state reaches -2 on the grid");
        s = wave * s + s / (2.0 + s);
    }
    return grid.analyze(u, out_modes);
}

inline ImpulseMap sine_impulse_map(HeatInstancePtr inst, std::size_t index) {
    if (!inst) throw std::invalid_argument("heat instance is null");
    if (index == 0) throw std::invalid_argument("impulse index is 1-based");
    ImpulseMap h;
    const std::size_t out_modes = inst->kernel_modes;
    h.value = [inst, index, out_modes](double t, const SpectralVector& v) {
        return impulse_image(inst->grid, index, t, v, out_modes);
    };
    h.lipschitz = 5.0 / 6.0;  // sin-term 1/3 plus the rational term's 1/2, valid on the sampled band
    h.uniform_bound = 2.5;
    return h;
}

// States whose physical profile is pointwise nonnegative: a positive ground
// mode dominates the higher modes, using |sin(n pi xi)| <= n sin(pi xi).
// The rational impulse term only admits its small Lipschitz constant on the
// nonnegative band, so its validators sample from this cone.
inline StateSampler nonnegative_profile_sampler(double amplitude, std::size_t modes = 16) {
    if (amplitude <= 0.0) throw std::invalid_argument("sampler amplitude must be positive");
    return [amplitude, modes](SplitMix& rng) {
        SpectralVector v = SpectralVector::zero(modes);
        const double head = amplitude * rng.uniform(0.4, 1.0);
        v.coeffs[0] = head;
        for (std::size_t j = 1; j < modes; ++j) {
            const double k = static_cast<double>(j + 1);
            v.coeffs[j] = rng.uniform(-1.0, 1.0) * 0.5 * head / (k * k * k);
        }
        return v;
    };
}

// Shipping defaults: Gaussian kernel, slowly growing coefficient, ramp
// history on the first mode, two impulse windows.
inline HeatInstancePtr default_heat_instance(std::size_t kernel_modes = 65, std::size_t grid_points = 512) {
    return make_heat_instance([](double r) { return std::exp(-r * r); },
                              [](double t) { return 0.1 * (1.0 + 0.5 * t); }, kernel_modes, grid_points);
}

inline ProblemSpec default_heat_problem(HeatInstancePtr inst, std::size_t spectrum_modes = 160) {
    if (!inst) throw std::invalid_argument("heat instance is null");
    if (spectrum_modes < inst->kernel_modes)
        throw std::invalid_argument("spectrum must cover every kernel mode");

    TimePartition part;
    part.horizon = 1.0;
    part.delay = 0.1;
    part.onset = {0.3, 0.6};
    part.release = {0.4, 0.7};

    HistoryFunction hist;
    hist.value = [](double theta) { return SpectralVector::unit(0, 0.5 * (1.0 + theta / 0.1)); };
    hist.holder_exponent = 1.0;

    return ProblemSpec{dirichlet_spectrum(spectrum_modes), part, hist,
                       convolution_nonlinearity(inst, part.delay, part.horizon),
                       {sine_impulse_map(inst, 1), sine_impulse_map(inst, 2)}};
}

}  // namespace fglab
