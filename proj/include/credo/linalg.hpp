#pragma once

#include <utility>
#include <vector>

#include "credo/matrix.hpp"

namespace credo {

// Cholesky factor of an SPD matrix (M = L*L'). Returns false if a pivot
// drops below `pivot_tol` (matrix not positive definite at that tolerance).
bool cholesky(const Matrix& m, Matrix& lower, double pivot_tol = 1e-12);

// True iff M is symmetric (to 1e-12, relative to its magnitude) and the
// Cholesky factorization succeeds with pivots > 1e-12. Asymmetric input is
// an error, not `false`.
bool is_positive_definite(const Matrix& m);

// Solves A X = B by LU with partial pivoting. Throws SingularMatrixError.
Matrix solve(const Matrix& a, const Matrix& b);

Matrix inverse(const Matrix& a);

// Solves A X = B for SPD A via Cholesky. Throws SingularMatrixError when the
// factorization fails.
Matrix solve_spd(const Matrix& a, const Matrix& b);

struct EigenSym {
    std::vector<double> values;  // ascending
    Matrix vectors;              // columns, same order as values
};

// Jacobi rotation eigensolver for symmetric matrices.
EigenSym eigen_symmetric(const Matrix& m);

double min_eigenvalue_symmetric(const Matrix& m);

// Moore-Penrose pseudo-inverse for full-rank rectangular matrices:
// tall -> (L'L)^-1 L', wide -> L'(LL')^-1, square -> plain inverse.
// Throws SingularMatrixError on rank deficiency.
Matrix pinv(const Matrix& l);

// Upper estimate of the spectral radius via norm doubling
// (Gelfand: ||A^(2^k)||^(1/2^k) -> rho(A)). Good to ~1e-9 relative.
double spectral_radius(const Matrix& a);

}  // namespace credo
