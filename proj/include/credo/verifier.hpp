#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "credo/ellipsoid.hpp"
#include "credo/vcfile.hpp"
#include "credo/vehicle.hpp"

namespace credo {

// Closed per-component intervals for every bounded program variable.
struct DomainBox {
    std::map<std::string, std::vector<Interval>> vars;
    std::map<std::string, std::string> provenance;

    bool covers(const std::string& v) const { return vars.count(v) > 0; }
};

// Implication obligation: (hypotheses && domain) -> conclusion.
struct VC {
    std::string id;
    std::string loop_id;
    std::vector<Predicate> hypotheses;
    Predicate conclusion;
    std::string origin;  // contract anchors, human-readable
    DomainBox domain;
    // point-evaluation bindings for external function symbols; predicates
    // whose externals cancel under simplify do not need them
    std::map<std::string, ExternalFn> fns;
};

// Point checks against a VC. Each comparison is evaluated in its original
// form (externals bound through vc.fns); when that is not evaluable at the
// point, the simplified form is used instead.
bool vc_hypotheses_hold(const VC& vc, const std::map<std::string, Matrix>& vars);
double vc_violation(const VC& vc, const std::map<std::string, Matrix>& vars);

enum class VerdictStatus { Verified, Falsified, Unknown };

struct EffortStats {
    std::size_t samples = 0;
    std::size_t boxes = 0;
    double max_violation = 0.0;  // largest conclusion violation seen (samples)
};

struct Verdict {
    VerdictStatus status = VerdictStatus::Unknown;
    std::map<std::string, Matrix> witness;  // FALSIFIED only
    double witness_violation = 0.0;
    std::string reason;  // UNKNOWN: why; FALSIFIED: which conclusion failed
    EffortStats stats;

    static Verdict verified(EffortStats stats);
    // Re-evaluates the witness against the vc; throws ValidationError if it
    // does not actually violate the conclusion while satisfying the
    // hypotheses (falsifier honesty).
    static Verdict falsified(const VC& vc, std::map<std::string, Matrix> witness,
                             EffortStats stats);
    static Verdict unknown(std::string reason, EffortStats stats);
};

std::string to_string(VerdictStatus s);

// Closed-loop Lyapunov ellipsoid for x+ = (A - BK) x, from the discrete
// Lyapunov equation with Q = 1e-2 I, then scaled so the initial box
// (per-axis half-widths) lies inside {x'Px <= 1}.
Ellipsoid synthesize_linear_invariant(const Matrix& a, const Matrix& b, const Matrix& k,
                                      const std::vector<double>& initial_halfwidths);

// Builds the loop VCs from placed contracts and propagation steps:
// one (inserted require -> backward wp) per backward-propagated loop and one
// (strongest post -> inserted ensure) per forward-propagated loop. Domain
// boxes come from quadratic hypotheses plus the supplied facts. Throws
// ValidationError when a propagated contract lacks its partner.
std::vector<VC> gen_vcs(const AnnotatedProgram& prog,
                        const std::vector<PropagationStep>& steps,
                        const std::vector<DomainFact>& facts);

// {x : x'Q_hyp x <= 1} subset of {x : x'P_concl x <= 1} iff
// min-eig(Q_hyp - P_concl) >= -1e-9; FALSIFIED returns a hypothesis-boundary
// witness violating the conclusion.
Verdict check_ellipsoid_containment(const Matrix& q_hyp, const Matrix& p_concl);

struct CheckBudget {
    std::size_t samples = 100000;
    int depth = 12;
    std::uint64_t seed = 42;
};

// Two phases: seeded sampling of the hypothesis set for falsification, then
// adaptive interval bisection certifying on each leaf either the hypothesis
// refuted, the conclusion bounded, or sup(W - V) <= margin after simplify.
// Interval division by zero marks the box undecided rather than failing.
Verdict check_nonlinear_implication(const VC& vc, const CheckBudget& budget);

// Dispatches to the containment check when hypothesis and conclusion are
// quadratic forms over the same variable, otherwise to the nonlinear engine.
Verdict check_vc(const VC& vc, const CheckBudget& budget);

// ---- variable-bound extraction ---------------------------------------------------

struct ExtractedBounds {
    std::vector<Interval> x;      // state box from the ellipsoid invariant
    std::vector<Interval> phi;    // commanded wheel speeds over x-box and slips
    std::vector<Interval> omega;  // phi widened by the z-bound
};

// Bounds from the certified invariants plus the physical slip-range fact
// (which must be present; its absence is an error naming the assumption).
ExtractedBounds extract_bounds(const Ellipsoid& x_invariant, const Matrix& x_center,
                               double z_amplitude, const std::vector<DomainFact>& facts,
                               const CarParams& params);

}  // namespace credo
