#pragma once

// Piecewise representation of a computed solution.  Each piece carries a
// uniform node grid over one flow interval or impulse window; evaluation
// between nodes is linear interpolation.  The solution is left continuous at
// window onsets: value(onset_i) is the flow value, and the separately stored
// left limits feed the impulse maps.
//
// Node times are generated as start + (k * length) / steps.  With a
// power-of-two refinement of steps the coarse nodes reproduce bit-identically
// on the fine grid, so refined runs can be compared without interpolation.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "fglab/problem.hpp"
#include "fglab/spectral.hpp"

namespace fglab {

struct TrajectoryPiece {
    double start = 0.0;
    double end = 0.0;
    std::size_t steps = 0;               ///< nodes k = 0..steps
    bool impulse = false;                ///< prescribed impulse-window piece
    std::size_t window_index = 0;        ///< 1-based when impulse
    std::vector<SpectralVector> values;  ///< steps + 1 node values

    double length() const { return end - start; }

    double node_time(std::size_t k) const {
        return start + (static_cast<double>(k) * length()) / static_cast<double>(steps);
    }

    SpectralVector value_at(double t) const {
        const double h = length() / static_cast<double>(steps);
        double rel = (t - start) / h;
        if (rel < 0.0) rel = 0.0;
        std::size_t k = static_cast<std::size_t>(rel);
        if (k >= steps) k = steps - 1;
        double u = rel - static_cast<double>(k);
        if (u < 0.0) u = 0.0;
        if (u > 1.0) u = 1.0;
        if (u == 0.0) return values[k];
        return values[k] + (u * (values[k + 1] - values[k]));
    }
};

/// Fixed-point diagnostics for one flow interval.
struct PicardStats {
    std::size_t interval = 0;  ///< flow interval index 0..q
    int sweeps = 0;
    double residual = 0.0;     ///< final sup-alpha distance between sweeps
    double worst_ratio = 0.0;  ///< max successive-distance ratio observed
};

class Trajectory {
public:
    TimePartition partition;
    HistoryFunction history;
    double alpha = 0.5;
    std::size_t dim = 0;          ///< Galerkin dimension the forcing argument was projected to
    double requested_dt = 0.0;
    std::size_t refine = 1;
    std::vector<TrajectoryPiece> pieces;            ///< alternating flow/impulse, 2q+1 total
    std::vector<SpectralVector> onset_left_limits;  ///< y(onset_i^-), i = 1..q
    std::vector<PicardStats> picard;
    std::vector<std::string> warnings;
    bool certified = false;

    /// Evaluate anywhere in [-delay, horizon].
    SpectralVector value(double t) const {
        const double slack = 1e-9 * std::max(1.0, partition.horizon);
        if (t < -partition.delay - slack || t > partition.horizon + slack)
            throw std::domain_error("trajectory: time " + std::to_string(t) + " outside [-delay, horizon]");
        if (t <= 0.0) {
            const double theta = std::max(t, -partition.delay);
            return history.value(theta);
        }
        const double tc = std::min(t, partition.horizon);
        std::size_t lo = 0, hi = pieces.size();
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (pieces[mid].end < tc)
                lo = mid + 1;
            else
                hi = mid;
        }
        if (lo == pieces.size()) lo = pieces.size() - 1;
        return pieces[lo].value_at(tc);
    }

    /// Left limit at window onset i (1-based), the value fed to the impulse map.
    const SpectralVector& left_limit(std::size_t window) const {
        if (window == 0 || window > onset_left_limits.size())
            throw std::out_of_range("trajectory: left limit window index");
        return onset_left_limits[window - 1];
    }

    double horizon() const { return partition.horizon; }
    double delay() const { return partition.delay; }
};

/// Delayed segment theta -> y(t + theta) anchored at time t.
class HistorySegment {
public:
    HistorySegment(const Trajectory& y, double t) : y_(&y), t_(t) {
        if (t < 0.0 || t > y.partition.horizon + 1e-9 * std::max(1.0, y.partition.horizon))
            throw std::domain_error("history_segment: anchor time outside [0, horizon]");
    }

    SpectralVector operator()(double theta) const {
        const double tau = y_->partition.delay;
        if (theta < -tau - 1e-9 * std::max(1.0, tau) || theta > 1e-12)
            throw std::domain_error("history_segment: offset outside [-delay, 0]");
        return y_->value(t_ + std::min(0.0, std::max(theta, -tau)));
    }

    SegmentFn fn() const {
        const HistorySegment copy = *this;
        return [copy](double theta) { return copy(theta); };
    }

private:
    const Trajectory* y_;
    double t_;
};

inline HistorySegment history_segment(const Trajectory& y, double t) { return HistorySegment(y, t); }

}  // namespace fglab
