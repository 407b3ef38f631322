#pragma once

// Seeded splitmix64 generator used wherever the library samples (constant
// validation, verification sweeps).  Self-contained so that identical seeds
// give identical streams on every platform.

#include <cstdint>
#include <cstddef>

#include "fglab/spectral.hpp"

namespace fglab {

class SplitMix {
public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    /// Coefficient vector with mode j amplitude scale / (j+1)^2, the decay
    /// class the parabolic flow produces.
    SpectralVector decaying_state(std::size_t modes, double scale) {
        SpectralVector v = SpectralVector::zero(modes);
        for (std::size_t j = 0; j < modes; ++j) {
            const double amp = scale / static_cast<double>((j + 1) * (j + 1));
            v.coeffs[j] = uniform(-amp, amp);
        }
        return v;
    }

private:
    std::uint64_t state_;
};

}  // namespace fglab
