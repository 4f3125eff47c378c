#include "credo/rng.hpp"

#include <cmath>

#include "credo/errors.hpp"

namespace credo {

namespace {

// Solves L' y = d for the upper-triangular system given lower-triangular L.
Matrix upper_solve(const Matrix& l, const Matrix& d) {
    const std::size_t n = l.rows();
    Matrix y = d;
    for (std::size_t i = n; i-- > 0;) {
        double s = y[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * y[k];
        y[i] = s / l(i, i);
    }
    return y;
}

}  // namespace

Matrix sample_ellipsoid_boundary(Rng& rng, const Matrix& chol_lower) {
    const std::size_t n = chol_lower.rows();
    Matrix g = rng.gaussian_column(n);
    double norm = g.frobenius();
    while (norm < 1e-12) {
        g = rng.gaussian_column(n);
        norm = g.frobenius();
    }
    g = g * (1.0 / norm);
    // x = L^-T g maps the unit sphere onto {x'Px = 1} with P = L L'
    return upper_solve(chol_lower, g);
}

Matrix sample_ellipsoid_interior(Rng& rng, const Matrix& chol_lower) {
    const std::size_t n = chol_lower.rows();
    const Matrix x = sample_ellipsoid_boundary(rng, chol_lower);
    const double r = std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
    return x * r;
}

}  // namespace credo
