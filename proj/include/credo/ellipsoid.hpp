#pragma once

#include <vector>

#include "credo/matrix.hpp"

namespace credo {

// The set {x : x'Px <= 1} for a symmetric positive definite P.
// Construction validates symmetry (1e-12 relative) and definiteness
// (Cholesky pivots > 1e-12).
class Ellipsoid {
public:
    explicit Ellipsoid(Matrix p);

    const Matrix& shape() const { return p_; }
    std::size_t dim() const { return p_.rows(); }

    double value(const Matrix& x) const;  // x'Px
    bool contains(const Matrix& x, double tol = 0.0) const;

    // Half-widths of the axis-aligned bounding box: sqrt((P^-1)_ii).
    std::vector<double> aabb_halfwidths() const;

    // Scales the set so that `gamma = max x'Px over the given box corners`
    // becomes 1, i.e. returns Ellipsoid(P / gamma).
    Ellipsoid scaled_to_contain_box(const std::vector<double>& halfwidths) const;

private:
    Matrix p_;
};

}  // namespace credo
