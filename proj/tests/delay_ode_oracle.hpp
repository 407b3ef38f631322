#pragma once

// Independent reference for the scalar linear delay equation
//
//     a'(t) = -lambda a(t) + c a(t - tau),   a(theta) = phi(theta) on [-tau, 0].
//
// Method of steps with classical RK4: because the step h divides tau, every
// delayed lookup lands in the already-integrated past, evaluated by cubic
// Hermite dense output on the stored nodes (values and derivatives).  Nothing
// here shares code with the solver under test: no eigen-expansions, no
// exponential integrators.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace testsupport {

class DelayOdeOracle {
public:
    DelayOdeOracle(double lambda, double c, double tau, std::function<double(double)> history,
                   double horizon, double dt)
        : lambda_(lambda), c_(c), tau_(tau), history_(std::move(history)) {
        if (!(dt > 0.0) || dt > tau) throw std::invalid_argument("delay oracle: need 0 < dt <= tau");
        const std::size_t per_segment = static_cast<std::size_t>(std::ceil(tau / dt - 1e-12));
        h_ = tau / static_cast<double>(per_segment);
        const std::size_t n = static_cast<std::size_t>(std::ceil(horizon / h_)) + per_segment;

        a_.reserve(n + 1);
        d_.reserve(n + 1);
        a_.push_back(history_(0.0));
        d_.push_back(rhs(0.0, a_[0]));
        for (std::size_t k = 0; k < n; ++k) {
            const double t = static_cast<double>(k) * h_;
            const double a = a_[k];
            const double k1 = rhs(t, a);
            const double k2 = rhs(t + 0.5 * h_, a + 0.5 * h_ * k1);
            const double k3 = rhs(t + 0.5 * h_, a + 0.5 * h_ * k2);
            const double k4 = rhs(t + h_, a + h_ * k3);
            a_.push_back(a + h_ / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
            d_.push_back(rhs(t + h_, a_.back()));
        }
    }

    double operator()(double t) const {
        if (t <= 0.0) return history_(t);
        const double front = static_cast<double>(a_.size() - 1) * h_;
        if (t > front + 1e-12) throw std::out_of_range("delay oracle: time beyond integrated range");
        const double rel = t / h_;
        std::size_t k = static_cast<std::size_t>(rel);
        if (k >= a_.size() - 1) k = a_.size() - 2;
        const double u = rel - static_cast<double>(k);
        const double u2 = u * u, u3 = u2 * u;
        return (2.0 * u3 - 3.0 * u2 + 1.0) * a_[k] + (u3 - 2.0 * u2 + u) * h_ * d_[k] +
               (-2.0 * u3 + 3.0 * u2) * a_[k + 1] + (u3 - u2) * h_ * d_[k + 1];
    }

private:
    double rhs(double t, double a) const { return -lambda_ * a + c_ * delayed(t - tau_); }

    double delayed(double s) const {
        if (s <= 0.0) return history_(s);
        // Only the completed past is ever queried here because h_ <= tau_.
        return (*this)(s);
    }

    double lambda_, c_, tau_, h_ = 0.0;
    std::function<double(double)> history_;
    std::vector<double> a_, d_;
};

}  // namespace testsupport
