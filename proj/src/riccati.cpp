#include "credo/riccati.hpp"

#include <cmath>
#include <sstream>

#include "credo/errors.hpp"
#include "credo/linalg.hpp"

namespace credo {

namespace {

constexpr int kIterationCap = 200;

std::string format_residual(double r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

}  // namespace

Ellipsoid solve_discrete_lyapunov(const Matrix& a, const Matrix& q) {
    if (a.rows() != a.cols() || q.rows() != q.cols() || a.rows() != q.rows()) {
        throw DimensionError("lyapunov dimensions: A " + a.describe() + ", Q " + q.describe());
    }
    const double rho = spectral_radius(a);
    if (rho >= 1.0) {
        throw InstabilityError("discrete Lyapunov: spectral radius " + format_residual(rho) +
                               " >= 1");
    }
    // P = sum_k (A^k)' Q A^k, accumulated by doubling
    Matrix p = q;
    Matrix ak = a;
    for (int it = 0; it < kIterationCap; ++it) {
        const Matrix next = p + ak.transpose() * p * ak;
        const double delta = Matrix::max_abs_diff(next, p);
        p = next;
        ak = ak * ak;
        if (delta <= 1e-14 * std::max(1.0, p.max_abs())) break;
    }
    const double residual = Matrix::max_abs_diff(p, a.transpose() * p * a + q);
    if (residual > 1e-9 * q.inf_norm()) {
        throw ConvergenceError("discrete Lyapunov residual " + format_residual(residual) +
                               " above tolerance (rho(A) = " + format_residual(rho) + ")");
    }
    return Ellipsoid(p);
}

LqrResult lqr_gain(const Matrix& a, const Matrix& b, const Matrix& qc, const Matrix& rc) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.rows() != n || qc.rows() != n || qc.cols() != n ||
        rc.rows() != b.cols() || rc.cols() != b.cols()) {
        throw DimensionError("lqr dimensions: A " + a.describe() + ", B " + b.describe() +
                             ", Q " + qc.describe() + ", R " + rc.describe());
    }
    // structured doubling: Ak -> Ak (I + Gk Hk)^-1 Ak, Hk -> P
    Matrix ak = a;
    Matrix gk = b * solve_spd(rc, b.transpose());
    Matrix hk = qc;
    double last_delta = 0.0;
    for (int it = 0; it < kIterationCap; ++it) {
        const Matrix w = Matrix::identity(n) + gk * hk;
        Matrix winv;
        try {
            winv = inverse(w);
        } catch (const SingularMatrixError&) {
            throw ConvergenceError("DARE doubling hit a singular pencil at iteration " +
                                   std::to_string(it));
        }
        const Matrix wa = winv * ak;
        const Matrix next_a = ak * wa;
        const Matrix next_g = gk + ak * winv * gk * ak.transpose();
        const Matrix next_h = hk + ak.transpose() * hk * wa;
        last_delta = Matrix::max_abs_diff(next_h, hk);
        ak = next_a;
        gk = next_g;
        hk = next_h;
        if (last_delta <= 1e-13 * std::max(1.0, hk.max_abs())) break;
    }
    const Matrix p = hk;
    // residual of P = A'PA - A'PB (R + B'PB)^-1 B'PA + Q
    const Matrix bpb = rc + b.transpose() * p * b;
    const Matrix k = solve_spd(bpb, b.transpose() * p * a);
    const Matrix res =
        a.transpose() * p * a - a.transpose() * p * b * k + qc - p;
    const double scale = std::max({1.0, p.max_abs(), qc.max_abs()});
    if (res.max_abs() > 1e-9 * scale) {
        throw ConvergenceError("DARE residual " + format_residual(res.max_abs()) +
                               " above tolerance; last step delta " +
                               format_residual(last_delta));
    }
    const Matrix a_cl = a - b * k;
    const double rho = spectral_radius(a_cl);
    if (rho >= 1.0) {
        throw InstabilityError("LQR closed loop has spectral radius " + format_residual(rho));
    }
    return LqrResult{k, p};
}

JacobianPair jacobian_fd(const VectorField& f, const Matrix& x0, const Matrix& u0, double h) {
    if (!x0.is_column() || !u0.is_column()) {
        throw DimensionError("jacobian_fd expects column vectors");
    }
    if (h <= 0.0) h = 1e-5 * std::max(1.0, x0.max_abs());

    auto eval = [&](const Matrix& x, const Matrix& u) {
        Matrix v = f(x, u);
        if (!v.all_finite()) {
            std::ostringstream os;
            os << "non-finite evaluation at x=[";
            for (std::size_t i = 0; i < x.rows(); ++i) os << (i ? " " : "") << x[i];
            os << "] u=[";
            for (std::size_t i = 0; i < u.rows(); ++i) os << (i ? " " : "") << u[i];
            os << "]";
            throw NonFiniteError(os.str());
        }
        return v;
    };

    const Matrix f0 = eval(x0, u0);
    const std::size_t m = f0.rows();
    JacobianPair out{Matrix(m, x0.rows()), Matrix(m, u0.rows())};
    for (std::size_t j = 0; j < x0.rows(); ++j) {
        Matrix xp = x0, xm = x0;
        xp[j] += h;
        xm[j] -= h;
        const Matrix d = (eval(xp, u0) - eval(xm, u0)) * (1.0 / (2.0 * h));
        for (std::size_t i = 0; i < m; ++i) out.a(i, j) = d[i];
    }
    for (std::size_t j = 0; j < u0.rows(); ++j) {
        Matrix up = u0, um = u0;
        up[j] += h;
        um[j] -= h;
        const Matrix d = (eval(x0, up) - eval(x0, um)) * (1.0 / (2.0 * h));
        for (std::size_t i = 0; i < m; ++i) out.b(i, j) = d[i];
    }
    return out;
}

}  // namespace credo
