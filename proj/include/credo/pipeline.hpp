#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "credo/codegen.hpp"
#include "credo/harness.hpp"
#include "credo/model_parse.hpp"
#include "credo/riccati.hpp"
#include "credo/validate.hpp"
#include "credo/vehicle.hpp"
#include "credo/verifier.hpp"

namespace credo {

struct PipelineOptions {
    double dt_override = 0.0;  // > 0 replaces the model's dt binding
    CheckBudget budget;
};

// Everything the autocoding pass produces for a model. Fields tied to the
// linear/sliding loops are only populated when such loops exist.
struct PipelineResult {
    Model model;  // bindings resolved (equilibrium refined, gains filled)
    std::vector<Loop> loops;
    double dt = 0.0;

    CarParams params;
    Equilibrium eq;
    bool has_linear_loop = false;
    Matrix a_cont, b_cont;  // continuous-time Jacobians at the equilibrium
    Matrix a_disc, b_disc;  // Euler-discretized pair used by the contracts
    LqrResult lqr;
    std::vector<double> init_box;
    bool has_invariant = false;
    Matrix invariant_p;  // scaled Lyapunov ellipsoid of the linear loop
    Matrix q1, q2;

    AnnotatedProgram program;
    std::vector<PropagationStep> steps;
    std::vector<DomainFact> facts;
    std::vector<VC> vcs;
    // per-loop propagation failures (the other loops still get their VCs)
    std::vector<std::string> loop_errors;

    std::string matlab_text;
    std::string vc_text;
};

// Car parameters from the model's bindings (defaults for missing entries).
CarParams params_from_model(const Model& m);

// Binds the vehicle-module implementations to the declared external
// functions (f_func, dphi_func, friction_func).
std::map<std::string, ExternalFn> external_bindings(const CarParams& p);

// The full autocoding pass: resolve auto bindings (equilibrium refinement,
// linearization, LQR gain), validate, synthesize the linear-loop invariant,
// generate and annotate code, propagate, and build the VCs by re-reading the
// emitted machine-vc text.
PipelineResult run_autocode(const Model& parsed, const PipelineOptions& opts = {});

// Convenience: parse + run; throws ParseError/ValidationError with the
// diagnostics joined when the model is rejected.
PipelineResult run_autocode_file(const std::string& model_text,
                                 const PipelineOptions& opts = {});

}  // namespace credo
