#include "credo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "credo/errors.hpp"

namespace credo {

bool cholesky(const Matrix& m, Matrix& lower, double pivot_tol) {
    if (m.rows() != m.cols()) {
        throw DimensionError("cholesky of non-square " + m.describe());
    }
    const std::size_t n = m.rows();
    lower = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= lower(j, k) * lower(j, k);
        if (!(d > pivot_tol)) return false;
        lower(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
            lower(i, j) = s / lower(j, j);
        }
    }
    return true;
}

bool is_positive_definite(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw DimensionError("positive-definiteness of non-square " + m.describe());
    }
    const double scale = std::max(1.0, m.max_abs());
    if (!m.is_symmetric(1e-12 * scale)) {
        throw ValidationError("is_positive_definite: asymmetric input");
    }
    Matrix l;
    return cholesky(m, l, 1e-12);
}

Matrix solve(const Matrix& a, const Matrix& b) {
    if (a.rows() != a.cols()) {
        throw DimensionError("solve with non-square " + a.describe());
    }
    if (a.rows() != b.rows()) {
        throw DimensionError("solve " + a.describe() + " against " + b.describe());
    }
    const std::size_t n = a.rows();
    Matrix lu = a;
    Matrix x = b;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(lu(col, col));
        for (std::size_t i = col + 1; i < n; ++i) {
            if (std::abs(lu(i, col)) > best) {
                best = std::abs(lu(i, col));
                piv = i;
            }
        }
        if (best < 1e-300) {
            throw SingularMatrixError("singular matrix in solve (pivot " +
                                      std::to_string(col) + ")");
        }
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(col, j), lu(piv, j));
            for (std::size_t j = 0; j < x.cols(); ++j) std::swap(x(col, j), x(piv, j));
        }
        for (std::size_t i = col + 1; i < n; ++i) {
            const double f = lu(i, col) / lu(col, col);
            lu(i, col) = f;
            for (std::size_t j = col + 1; j < n; ++j) lu(i, j) -= f * lu(col, j);
            for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= f * x(col, j);
        }
    }
    for (std::size_t col = n; col-- > 0;) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            double s = x(col, j);
            for (std::size_t k = col + 1; k < n; ++k) s -= lu(col, k) * x(k, j);
            x(col, j) = s / lu(col, col);
        }
    }
    return x;
}

Matrix inverse(const Matrix& a) { return solve(a, Matrix::identity(a.rows())); }

Matrix solve_spd(const Matrix& a, const Matrix& b) {
    Matrix l;
    if (!cholesky(a, l)) {
        throw SingularMatrixError("solve_spd: matrix not positive definite");
    }
    const std::size_t n = a.rows();
    Matrix x = b;
    // forward substitution L y = b
    for (std::size_t j = 0; j < x.cols(); ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = x(i, j);
            for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, j);
            x(i, j) = s / l(i, i);
        }
        // back substitution L' x = y
        for (std::size_t i = n; i-- > 0;) {
            double s = x(i, j);
            for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x(k, j);
            x(i, j) = s / l(i, i);
        }
    }
    return x;
}

EigenSym eigen_symmetric(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw DimensionError("eigen_symmetric of non-square " + m.describe());
    }
    const double scale = std::max(1.0, m.max_abs());
    if (!m.is_symmetric(1e-9 * scale)) {
        throw ValidationError("eigen_symmetric: asymmetric input");
    }
    const std::size_t n = m.rows();
    Matrix a = m;
    Matrix v = Matrix::identity(n);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-30 * scale * scale) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
    EigenSym out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

double min_eigenvalue_symmetric(const Matrix& m) {
    return eigen_symmetric(m).values.front();
}

Matrix pinv(const Matrix& l) {
    if (l.rows() == l.cols()) return inverse(l);
    if (l.rows() > l.cols()) {
        const Matrix gram = l.transpose() * l;
        Matrix f;
        if (!cholesky(gram, f, 1e-12)) {
            throw SingularMatrixError("pinv: tall matrix is rank deficient");
        }
        return solve_spd(gram, l.transpose());
    }
    const Matrix gram = l * l.transpose();
    Matrix f;
    if (!cholesky(gram, f, 1e-12)) {
        throw SingularMatrixError("pinv: wide matrix is rank deficient");
    }
    return solve_spd(gram, l).transpose();
}

double spectral_radius(const Matrix& a) {
    if (a.rows() != a.cols()) {
        throw DimensionError("spectral_radius of non-square " + a.describe());
    }
    if (a.rows() == 0) return 0.0;
    // log rho = log||A|| + sum_k 2^-k log||C_{k-1}^2|| with C_k the running
    // normalized square; per-step normalization dodges overflow.
    Matrix b = a;
    double norm = b.frobenius();
    if (norm == 0.0) return 0.0;
    double log_rho = std::log(norm);
    double weight = 1.0;
    for (int k = 0; k < 48; ++k) {
        b = b * (1.0 / norm);
        b = b * b;
        norm = b.frobenius();
        if (norm == 0.0) return 0.0;
        weight *= 0.5;
        log_rho += weight * std::log(norm);
    }
    return std::exp(log_rho);
}

}  // namespace credo
