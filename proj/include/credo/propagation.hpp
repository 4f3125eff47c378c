#pragma once

#include <string>
#include <vector>

#include "credo/ellipsoid.hpp"
#include "credo/model.hpp"
#include "credo/program.hpp"

namespace credo {

// One transport of a predicate across a statement (or the plant update).
// Forward: in_pred holds before the statement, out_pred after. Backward:
// in_pred is the postcondition pushed in, out_pred the computed wp.
struct PropagationStep {
    std::string loop_id;
    std::size_t statement = 0;
    bool plant_step = false;
    bool forward = true;
    Predicate in_pred;
    Predicate out_pred;
};

// Image {Lx : x'Px <= 1} as a quadratic form Q on y = Lx.
//  - square/wide full-row-rank L:  Q = (L P^-1 L')^-1  (exact image)
//  - tall injective L:             Q = pinv(L)' P pinv(L)  (tight on the image)
// Soundness either way: x'Px <= 1 implies (Lx)' Q (Lx) <= 1. Wide
// rank-deficient maps raise SingularMatrixError (degenerate image).
Matrix ellipsoid_affine_image(const Matrix& p, const Matrix& l);

struct ForwardResult {
    Matrix q1;  // on the stacked [state; controller output]
    Matrix q2;  // on the state after the plant update
    std::vector<PropagationStep> steps;
    AnnotatedProgram prog;  // contracts StepEnsure / PlantPre / StrongestPost added
};

// Pushes the ellipsoid x'Px <= 1 forward through a linear loop: Q1 is the
// image under [I; G] at the controller assignment (G the loop's composed
// gain), Q2 the image under the closed loop A + B G. Throws ValidationError
// naming the first non-linear statement found inside the span.
ForwardResult propagate_linear_forward(const AnnotatedProgram& prog, const Model& m,
                                       const Loop& loop, const std::string& loop_id,
                                       const Ellipsoid& p, const std::string& p_name = "P");

// Assignment rule: post[v := e], capture-free.
Predicate wp_assign(const Predicate& post, const std::string& v, const Expr& e);

// Backward fold of wp_assign over a statement range (inclusive, reversed);
// Output statements are skipped, Input statements terminate the fold.
Predicate wp_over_range(const std::vector<Statement>& statements, std::size_t first,
                        std::size_t last, const Predicate& post);

struct BackwardResult {
    Predicate wp_at_span_start;
    std::vector<PropagationStep> steps;
    AnnotatedProgram prog;  // BackwardWp contracts added at span end and start
};

// Folds the postcondition backward across the loop span, treating the placed
// plant-update assume as an assignment first, then every statement
// right-to-left. The intermediate wp after the plant substitution anchors at
// span end, the final one at span start.
BackwardResult propagate_backward(const AnnotatedProgram& prog, const Loop& loop,
                                  const std::string& loop_id, const Predicate& post);

}  // namespace credo
