#pragma once

#include "credo/interval.hpp"
#include "credo/matrix.hpp"
#include "credo/riccati.hpp"

namespace credo {

// Single-track car with fixed steering angle. Tire forces are linear in the
// longitudinal slips and in the axle slip angles; body dynamics follow
// Newton-Euler in the path frame. State x = [V, beta, psidot], input
// u = [s_F, s_R] (longitudinal slips), wheel speeds omega = [w_F, w_R].
struct CarParams {
    double r = 0.3;        // wheel radius (m)
    double l_f = 1.2;      // CG to front axle (m)
    double l_r = 1.4;      // CG to rear axle (m)
    double i_w = 1.8;      // wheel inertia (kg m^2)
    double mass = 1500.0;  // vehicle mass (kg)
    double i_z = 2500.0;   // yaw inertia (kg m^2)
    double c_xf = 60000.0;  // longitudinal tire stiffness, front (N/slip)
    double c_xr = 60000.0;  // longitudinal tire stiffness, rear
    double c_af = 55000.0;  // cornering stiffness, front (N/rad)
    double c_ar = 55000.0;  // cornering stiffness, rear
    double delta = 0.05;    // fixed steering angle (rad)
    double c_sat = 1.0;     // saturation bound of the sliding controller
    double omega_min = 1e-3;     // wheel-speed floor guarding 1/(w r)
    double slip_floor = -0.95;   // slips must stay above -1 + 0.05

    void validate() const;  // throws ValidationError on nonphysical values
};

struct CarState {
    Matrix x;      // [V, beta, psidot]
    Matrix omega;  // [w_F, w_R]
};

struct Equilibrium {
    Matrix x_ss;  // 3-vector
    Matrix u_ss;  // steady slips, 2-vector
};

// Longitudinal slips from wheel speeds (Eq. form: mismatch of wheel
// tangential speed and projected vehicle speed, normalized by omega r).
Matrix longitudinal_slips(const Matrix& x, const Matrix& omega, const CarParams& p);

// Wheel speeds realizing commanded slips; the inverse map of the slips.
Matrix phi(const Matrix& x, const Matrix& u, const CarParams& p);

// Sliding manifold coordinate z = omega - phi(x, u).
Matrix manifold_z(const Matrix& omega, const Matrix& x, const Matrix& u, const CarParams& p);

// Body dynamics xdot = f(x, u).
Matrix plant_f(const Matrix& x, const Matrix& u, const CarParams& p);

// Longitudinal tire forces at the commanded slips, fx_i = C_x,i u_i.
// The state argument mirrors the annotated code's friction_func(x, u).
Matrix friction_forces(const Matrix& x, const Matrix& u, const CarParams& p);

// Transposed Jacobian of phi with respect to x (3x2), by central differences.
Matrix dphi_transposed(const Matrix& x, const Matrix& u, const CarParams& p);

// LQR feedback utilde = -K xtilde.
Matrix linear_control(const Matrix& xtilde, const Matrix& k);

// Sliding-mode torque law: T = fx r + I_w dphi' f(x,u) - sat(z).
Matrix torque_control(const Matrix& z, const Matrix& x, const Matrix& u, const CarParams& p);

// Auxiliary dynamics zdot = (T - fx r - I_w dphi' f(x,u)) / I_w.
Matrix aux_dynamics(const Matrix& z, const Matrix& t, const Matrix& x, const Matrix& u,
                    const CarParams& p);

// Wheel rotation dynamics omegadot = (T - fx r) / I_w.
Matrix wheel_dynamics(const Matrix& t, const Matrix& fx, const CarParams& p);

// Accepts the candidate if ||f(x_ss, u_ss)||_inf <= 1e-8; otherwise refines it
// by damped Gauss-Newton (least-norm steps on the underdetermined system) and
// re-checks. Throws ConvergenceError with the final residual on failure.
Equilibrium verify_equilibrium(const Matrix& x_ss, const Matrix& u_ss, const CarParams& p);

// Interval extension of phi over a state box and slip box (for bound
// extraction). x_box has 3 entries, slip_box 2.
std::vector<Interval> phi_interval(const std::vector<Interval>& x_box,
                                   const std::vector<Interval>& slip_box,
                                   const CarParams& p);

}  // namespace credo
