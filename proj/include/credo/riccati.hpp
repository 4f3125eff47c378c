#pragma once

#include <functional>
#include <utility>

#include "credo/ellipsoid.hpp"
#include "credo/matrix.hpp"

namespace credo {

// Solves P = A'PA + Q for a Schur-stable A and SPD Q by the doubling
// iteration (P <- P + A'PA with squared A). Throws InstabilityError when
// rho(A) >= 1, ConvergenceError if the residual fails to reach
// 1e-9 * ||Q||_inf within the iteration cap.
Ellipsoid solve_discrete_lyapunov(const Matrix& a, const Matrix& q);

struct LqrResult {
    Matrix gain;      // K with u = -K x
    Matrix riccati;   // stabilizing DARE solution
};

// Discrete-time LQR via the structured doubling algorithm. Postconditions:
// the Riccati residual is <= 1e-9 * scale in inf norm,
// K = (R + B'PB)^-1 B'PA and rho(A - BK) < 1.
LqrResult lqr_gain(const Matrix& a, const Matrix& b, const Matrix& qc, const Matrix& rc);

using VectorField = std::function<Matrix(const Matrix& x, const Matrix& u)>;

struct JacobianPair {
    Matrix a;  // df/dx
    Matrix b;  // df/du
};

// Central-difference Jacobians of f at (x0, u0). Step defaults to
// 1e-5 * max(1, ||x0||_inf) when h <= 0. Throws NonFiniteError (carrying the
// offending point) if f evaluates to a non-finite value.
JacobianPair jacobian_fd(const VectorField& f, const Matrix& x0, const Matrix& u0,
                         double h = 0.0);

}  // namespace credo
