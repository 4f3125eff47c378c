#include "credo/vehicle.hpp"

#include <cmath>
#include <sstream>

#include "credo/errors.hpp"
#include "credo/linalg.hpp"

namespace credo {

void CarParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) {
            throw ValidationError(std::string("car parameter ") + name + " must be > 0");
        }
    };
    positive(r, "r");
    positive(i_w, "Iw");
    positive(mass, "m");
    positive(i_z, "Iz");
    positive(l_f, "lf");
    positive(l_r, "lr");
    positive(c_sat, "c_sat");
}

namespace {

void check_x(const Matrix& x) {
    if (!x.is_column() || x.rows() != 3) {
        throw DimensionError("car state must be a 3-vector, got " + x.describe());
    }
}

void check_u(const Matrix& u) {
    if (!u.is_column() || u.rows() != 2) {
        throw DimensionError("slip input must be a 2-vector, got " + u.describe());
    }
}

void check_slips(const Matrix& u, const CarParams& p) {
    for (std::size_t i = 0; i < 2; ++i) {
        if (!(u[i] > p.slip_floor)) {
            std::ostringstream os;
            os << "slip s_" << (i == 0 ? "F" : "R") << " = " << u[i]
               << " at or below the admissible floor " << p.slip_floor
               << " (stationary-spinning singularity)";
            throw SingularityError(os.str());
        }
    }
}

}  // namespace

Matrix longitudinal_slips(const Matrix& x, const Matrix& omega, const CarParams& p) {
    check_x(x);
    if (!omega.is_column() || omega.rows() != 2) {
        throw DimensionError("wheel speeds must be a 2-vector");
    }
    for (std::size_t i = 0; i < 2; ++i) {
        if (!(omega[i] >= p.omega_min)) {
            std::ostringstream os;
            os << "wheel speed omega_" << (i == 0 ? "F" : "R") << " = " << omega[i]
               << " below floor " << p.omega_min << " (division by omega r)";
            throw SingularityError(os.str());
        }
    }
    const double v = x[0], beta = x[1], psidot = x[2];
    Matrix s(2, 1);
    s[0] = (v * std::cos(beta - p.delta) + psidot * p.l_f * std::sin(p.delta) -
            omega[0] * p.r) /
           (omega[0] * p.r);
    s[1] = (v * std::cos(beta) - omega[1] * p.r) / (omega[1] * p.r);
    return s;
}

Matrix phi(const Matrix& x, const Matrix& u, const CarParams& p) {
    check_x(x);
    check_u(u);
    check_slips(u, p);
    const double v = x[0], beta = x[1], psidot = x[2];
    Matrix w(2, 1);
    w[0] = (v * std::cos(beta - p.delta) + psidot * p.l_f * std::sin(p.delta)) /
           ((1.0 + u[0]) * p.r);
    w[1] = v * std::cos(beta) / ((1.0 + u[1]) * p.r);
    return w;
}

Matrix manifold_z(const Matrix& omega, const Matrix& x, const Matrix& u, const CarParams& p) {
    return omega - phi(x, u, p);
}

Matrix plant_f(const Matrix& x, const Matrix& u, const CarParams& p) {
    check_x(x);
    check_u(u);
    check_slips(u, p);
    const double v = x[0], beta = x[1], psidot = x[2];
    if (!(v > 0.0)) {
        std::ostringstream os;
        os << "speed V must be positive, got " << v;
        throw SingularityError(os.str());
    }

    const double fxf = p.c_xf * u[0];
    const double fxr = p.c_xr * u[1];
    const double alpha_f = p.delta - beta - p.l_f * psidot / v;
    const double alpha_r = -beta + p.l_r * psidot / v;
    const double fyf = p.c_af * alpha_f;
    const double fyr = p.c_ar * alpha_r;

    const double cd = std::cos(p.delta), sd = std::sin(p.delta);
    const double fx_body = fxf * cd - fyf * sd + fxr;
    const double fy_body = fxf * sd + fyf * cd + fyr;

    const double vx = v * std::cos(beta), vy = v * std::sin(beta);
    const double ax = vy * psidot + fx_body / p.mass;
    const double ay = -vx * psidot + fy_body / p.mass;

    Matrix xdot(3, 1);
    xdot[0] = std::cos(beta) * ax + std::sin(beta) * ay;
    xdot[1] = (std::cos(beta) * ay - std::sin(beta) * ax) / v;
    xdot[2] = (p.l_f * (fxf * sd + fyf * cd) - p.l_r * fyr) / p.i_z;
    return xdot;
}

Matrix friction_forces(const Matrix&, const Matrix& u, const CarParams& p) {
    check_u(u);
    Matrix fx(2, 1);
    fx[0] = p.c_xf * u[0];
    fx[1] = p.c_xr * u[1];
    return fx;
}

Matrix dphi_transposed(const Matrix& x, const Matrix& u, const CarParams& p) {
    check_x(x);
    check_u(u);
    const double h = 1e-5 * std::max(1.0, x.max_abs());
    Matrix out(3, 2);
    for (std::size_t j = 0; j < 3; ++j) {
        Matrix xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const Matrix d = (phi(xp, u, p) - phi(xm, u, p)) * (1.0 / (2.0 * h));
        out(j, 0) = d[0];
        out(j, 1) = d[1];
    }
    return out;
}

Matrix linear_control(const Matrix& xtilde, const Matrix& k) {
    if (k.cols() != xtilde.rows() || !xtilde.is_column()) {
        throw DimensionError("linear control: K " + k.describe() + " against xtilde " +
                             xtilde.describe());
    }
    return -(k * xtilde);
}

Matrix torque_control(const Matrix& z, const Matrix& x, const Matrix& u, const CarParams& p) {
    if (!z.is_column() || z.rows() != 2) {
        throw DimensionError("z must be a 2-vector");
    }
    const Matrix fx = friction_forces(x, u, p);
    const Matrix dphi = dphi_transposed(x, u, p);
    const Matrix f = plant_f(x, u, p);
    Matrix t = fx * p.r + (dphi.transpose() * f) * p.i_w;
    for (std::size_t i = 0; i < 2; ++i) {
        t[i] -= std::min(std::max(z[i], -p.c_sat), p.c_sat);
    }
    return t;
}

Matrix aux_dynamics(const Matrix&, const Matrix& t, const Matrix& x, const Matrix& u,
                    const CarParams& p) {
    const Matrix fx = friction_forces(x, u, p);
    const Matrix dphi = dphi_transposed(x, u, p);
    const Matrix f = plant_f(x, u, p);
    return (t - fx * p.r - (dphi.transpose() * f) * p.i_w) * (1.0 / p.i_w);
}

Matrix wheel_dynamics(const Matrix& t, const Matrix& fx, const CarParams& p) {
    if (t.rows() != fx.rows() || !t.is_column()) {
        throw DimensionError("wheel dynamics: T " + t.describe() + " against fx " +
                             fx.describe());
    }
    return (t - fx * p.r) * (1.0 / p.i_w);
}

Equilibrium verify_equilibrium(const Matrix& x_ss, const Matrix& u_ss, const CarParams& p) {
    check_x(x_ss);
    check_u(u_ss);
    constexpr double kTol = 1e-8;

    Matrix x = x_ss, u = u_ss;
    double residual = plant_f(x, u, p).max_abs();
    if (residual <= kTol) return Equilibrium{x, u};

    const VectorField f = [&p](const Matrix& xs, const Matrix& us) {
        return plant_f(xs, us, p);
    };
    for (int it = 0; it < 100; ++it) {
        const Matrix fv = plant_f(x, u, p);
        residual = fv.max_abs();
        if (residual <= kTol) return Equilibrium{x, u};
        const JacobianPair j = jacobian_fd(f, x, u);
        const Matrix jac = Matrix::hstack(j.a, j.b);  // 3x5, full row rank
        Matrix step;
        try {
            step = pinv(jac) * fv;  // least-norm Newton step
        } catch (const SingularMatrixError&) {
            break;
        }
        // damped line search on ||f||_inf
        double lambda = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 8; ++ls) {
            Matrix xn = x, un = u;
            for (std::size_t i = 0; i < 3; ++i) xn[i] -= lambda * step[i];
            for (std::size_t i = 0; i < 2; ++i) un[i] -= lambda * step[3 + i];
            try {
                if (plant_f(xn, un, p).max_abs() < residual) {
                    x = xn;
                    u = un;
                    improved = true;
                    break;
                }
            } catch (const SingularityError&) {
                // step left the admissible region; shrink
            }
            lambda *= 0.5;
        }
        if (!improved) break;
    }
    std::ostringstream os;
    os << "equilibrium refinement did not converge; final residual " << residual;
    throw ConvergenceError(os.str());
}

std::vector<Interval> phi_interval(const std::vector<Interval>& x_box,
                                   const std::vector<Interval>& slip_box,
                                   const CarParams& p) {
    if (x_box.size() != 3 || slip_box.size() != 2) {
        throw DimensionError("phi_interval expects a 3-interval state box and 2 slips");
    }
    const Interval v = x_box[0], beta = x_box[1], psidot = x_box[2];
    const Interval delta = Interval::point(p.delta);
    const Interval rr = Interval::point(p.r);
    const Interval one = Interval::point(1.0);
    const Interval lf = Interval::point(p.l_f);

    std::vector<Interval> out(2);
    out[0] = (v * cos(beta - delta) + psidot * lf * sin(delta)) /
             ((one + slip_box[0]) * rr);
    out[1] = v * cos(beta) / ((one + slip_box[1]) * rr);
    return out;
}

}  // namespace credo
