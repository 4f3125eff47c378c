#pragma once

#include <cmath>
#include <cstdint>

#include "credo/matrix.hpp"

namespace credo {

// Deterministic splitmix64-based generator. Distributions are hand-rolled so
// that streams are reproducible independent of the standard library build.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller (one value per call, deterministic)
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    Matrix matrix(std::size_t rows, std::size_t cols, double lo = -1.0, double hi = 1.0) {
        Matrix m(rows, cols);
        for (double& v : m.data()) v = uniform(lo, hi);
        return m;
    }

    Matrix gaussian_column(std::size_t n) {
        Matrix m(n, 1);
        for (double& v : m.data()) v = gaussian();
        return m;
    }

    // Derives an independent stream (e.g. one per verification condition).
    Rng split(std::uint64_t stream_id) const {
        return Rng(state_ + 0x632be59bd9b4e019ULL * (stream_id + 1));
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Uniform point on the boundary {x : x'Px = 1}: gaussian direction mapped
// through the inverse Cholesky factor of P.
Matrix sample_ellipsoid_boundary(Rng& rng, const Matrix& chol_lower);

// Uniform point inside {x : x'Px <= 1} (boundary sample scaled by U^(1/n)).
Matrix sample_ellipsoid_interior(Rng& rng, const Matrix& chol_lower);

}  // namespace credo
