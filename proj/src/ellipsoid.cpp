#include "credo/ellipsoid.hpp"

#include <cmath>

#include "credo/errors.hpp"
#include "credo/linalg.hpp"

namespace credo {

Ellipsoid::Ellipsoid(Matrix p) : p_(std::move(p)) {
    if (p_.rows() != p_.cols() || p_.rows() == 0) {
        throw DimensionError("ellipsoid shape must be square, got " + p_.describe());
    }
    const double scale = std::max(1.0, p_.max_abs());
    if (!p_.is_symmetric(1e-12 * scale)) {
        throw ValidationError("ellipsoid shape matrix is not symmetric");
    }
    // exact symmetrization so downstream eigen code sees a clean matrix
    for (std::size_t i = 0; i < p_.rows(); ++i) {
        for (std::size_t j = i + 1; j < p_.cols(); ++j) {
            const double v = 0.5 * (p_(i, j) + p_(j, i));
            p_(i, j) = v;
            p_(j, i) = v;
        }
    }
    Matrix l;
    if (!cholesky(p_, l, 1e-12)) {
        throw ValidationError("ellipsoid shape matrix is not positive definite");
    }
}

double Ellipsoid::value(const Matrix& x) const {
    if (!x.is_column() || x.rows() != dim()) {
        throw DimensionError("ellipsoid value of " + x.describe() + " against dim " +
                             std::to_string(dim()));
    }
    return (x.transpose() * p_ * x).scalar();
}

bool Ellipsoid::contains(const Matrix& x, double tol) const {
    return value(x) <= 1.0 + tol;
}

std::vector<double> Ellipsoid::aabb_halfwidths() const {
    const Matrix inv = solve_spd(p_, Matrix::identity(dim()));
    std::vector<double> hw(dim());
    for (std::size_t i = 0; i < dim(); ++i) hw[i] = std::sqrt(inv(i, i));
    return hw;
}

Ellipsoid Ellipsoid::scaled_to_contain_box(const std::vector<double>& halfwidths) const {
    if (halfwidths.size() != dim()) {
        throw DimensionError("box dimension does not match ellipsoid dimension");
    }
    // max of a PSD quadratic over a box is attained at a corner
    double gamma = 0.0;
    const std::size_t n = dim();
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        Matrix corner(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            corner[i] = (mask >> i) & 1 ? halfwidths[i] : -halfwidths[i];
        }
        gamma = std::max(gamma, value(corner));
    }
    if (gamma <= 0.0) {
        throw ValidationError("degenerate scaling box for ellipsoid");
    }
    return Ellipsoid(p_ * (1.0 / gamma));
}

}  // namespace credo
