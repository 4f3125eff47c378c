#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "credo/expr.hpp"
#include "credo/vehicle.hpp"

namespace credo {

// Invariant monitor: value = max over conjuncts of (lhs - rhs + 1), so a
// monitor reads 1.0 exactly on the invariant boundary and > 1 in violation
// (for the usual g(X) <= 1 form the value is g(X) itself).
struct SimMonitor {
    std::string name;
    Predicate pred;
};

struct SimConfig {
    double dt = 0.01;
    std::size_t steps = 1;
    CarState initial;
    std::vector<SimMonitor> monitors;
    std::uint64_t seed = 0;  // recorded for sweep reproducibility
};

struct TraceRow {
    double time = 0.0;
    Matrix x;       // [V, beta, psidot]
    Matrix xtilde;  // x - x_ss
    Matrix u;       // commanded slips
    Matrix omega;   // wheel speeds
    Matrix z;       // manifold coordinate
    Matrix torque;
    std::vector<double> monitor_values;
};

struct Trace {
    std::vector<std::string> monitor_names;
    std::vector<TraceRow> rows;  // steps + 1 rows
};

// One explicit-Euler step of the full closed loop: LQR slips from xtilde,
// commanded wheel speeds, manifold coordinate, torque law, wheel update with
// the tire-model friction at the commanded slips, body update.
CarState step_closed_loop(const CarState& state, const SimConfig& cfg, const CarParams& p,
                          const Matrix& gain_k, const Equilibrium& eq);

// Deterministic trace; throws Error naming the step on integration failure
// (singularity or non-finite state).
Trace run(const SimConfig& cfg, const CarParams& p, const Matrix& gain_k,
          const Equilibrium& eq);

struct MonitorResult {
    std::string name;
    double max_value = 0.0;
    long first_violation = -1;  // row index of the first value > 1 + 1e-9
};

struct MonitorReport {
    std::vector<MonitorResult> monitors;
    bool clean() const;
};

MonitorReport monitor_report(const Trace& trace);

// Tab-separated export, one row per step, header naming every column.
std::string trace_to_text(const Trace& trace);

}  // namespace credo
