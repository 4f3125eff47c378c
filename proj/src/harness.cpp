#include "credo/harness.hpp"

#include <sstream>

#include "credo/errors.hpp"

namespace credo {

namespace {

struct StepSignals {
    Matrix xtilde, u, omega_cmd, z, torque, friction;
};

StepSignals compute_signals(const CarState& state, const CarParams& p, const Matrix& gain_k,
                            const Equilibrium& eq) {
    StepSignals s;
    s.xtilde = state.x - eq.x_ss;
    s.u = linear_control(s.xtilde, gain_k) + eq.u_ss;
    s.omega_cmd = phi(state.x, s.u, p);
    s.z = state.omega - s.omega_cmd;
    s.torque = torque_control(s.z, state.x, s.u, p);
    s.friction = friction_forces(state.x, s.u, p);
    return s;
}

double monitor_value(const SimMonitor& m, const EvalEnv& env) {
    double worst = -1e300;
    for (const Comparison& c : m.pred.conjuncts) {
        worst = std::max(worst,
                         eval(c.lhs, env).scalar() - eval(c.rhs, env).scalar() + 1.0);
    }
    return worst;
}

}  // namespace

CarState step_closed_loop(const CarState& state, const SimConfig& cfg, const CarParams& p,
                          const Matrix& gain_k, const Equilibrium& eq) {
    if (!(cfg.dt > 0.0)) throw ValidationError("dt must be positive");
    const StepSignals s = compute_signals(state, p, gain_k, eq);
    CarState next;
    next.omega = state.omega + wheel_dynamics(s.torque, s.friction, p) * cfg.dt;
    next.x = state.x + plant_f(state.x, s.u, p) * cfg.dt;
    if (!next.x.all_finite() || !next.omega.all_finite()) {
        throw NonFiniteError("closed-loop step produced a non-finite state");
    }
    return next;
}

Trace run(const SimConfig& cfg, const CarParams& p, const Matrix& gain_k,
          const Equilibrium& eq) {
    if (cfg.steps < 1) throw ValidationError("steps must be >= 1");
    Trace trace;
    for (const SimMonitor& m : cfg.monitors) trace.monitor_names.push_back(m.name);

    CarState state = cfg.initial;
    for (std::size_t k = 0; k <= cfg.steps; ++k) {
        TraceRow row;
        row.time = cfg.dt * static_cast<double>(k);
        try {
            const StepSignals s = compute_signals(state, p, gain_k, eq);
            row.x = state.x;
            row.xtilde = s.xtilde;
            row.u = s.u;
            row.omega = state.omega;
            row.z = s.z;
            row.torque = s.torque;
            EvalEnv env;
            env.vars = {{"x", state.x},   {"xtilde", s.xtilde}, {"u", s.u},
                        {"omega", state.omega}, {"z", s.z},     {"torque", s.torque}};
            for (const SimMonitor& m : cfg.monitors) {
                row.monitor_values.push_back(monitor_value(m, env));
            }
            trace.rows.push_back(std::move(row));
            if (k < cfg.steps) state = step_closed_loop(state, cfg, p, gain_k, eq);
        } catch (const Error& err) {
            throw IntegrationError("integration failed at step " + std::to_string(k) +
                                   ": " + err.what());
        }
    }
    return trace;
}

bool MonitorReport::clean() const {
    for (const MonitorResult& m : monitors) {
        if (m.first_violation >= 0) return false;
    }
    return true;
}

MonitorReport monitor_report(const Trace& trace) {
    MonitorReport report;
    for (std::size_t mi = 0; mi < trace.monitor_names.size(); ++mi) {
        MonitorResult r;
        r.name = trace.monitor_names[mi];
        for (std::size_t k = 0; k < trace.rows.size(); ++k) {
            const double v = trace.rows[k].monitor_values.at(mi);
            r.max_value = std::max(r.max_value, v);
            if (r.first_violation < 0 && v > 1.0 + 1e-9) {
                r.first_violation = static_cast<long>(k);
            }
        }
        report.monitors.push_back(std::move(r));
    }
    return report;
}

std::string trace_to_text(const Trace& trace) {
    std::ostringstream os;
    os << "time\tV\tbeta\tpsidot\txt1\txt2\txt3\tsF\tsR\twF\twR\tz1\tz2\tT1\tT2";
    for (const std::string& n : trace.monitor_names) os << "\t" << n;
    os << "\n";
    for (const TraceRow& r : trace.rows) {
        os << format_double(r.time);
        for (std::size_t i = 0; i < 3; ++i) os << "\t" << format_double(r.x[i]);
        for (std::size_t i = 0; i < 3; ++i) os << "\t" << format_double(r.xtilde[i]);
        for (std::size_t i = 0; i < 2; ++i) os << "\t" << format_double(r.u[i]);
        for (std::size_t i = 0; i < 2; ++i) os << "\t" << format_double(r.omega[i]);
        for (std::size_t i = 0; i < 2; ++i) os << "\t" << format_double(r.z[i]);
        for (std::size_t i = 0; i < 2; ++i) os << "\t" << format_double(r.torque[i]);
        for (double v : r.monitor_values) os << "\t" << format_double(v);
        os << "\n";
    }
    return os.str();
}

}  // namespace credo
