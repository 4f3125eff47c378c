#pragma once

#include <string>
#include <vector>

#include "credo/model.hpp"
#include "credo/program.hpp"

namespace credo {

// Translates a validated model into straight-line code: one assignment per
// non-temp block in topological order (declaration-order tie break, loop
// blocks kept contiguous), temp-signal expressions fused into their
// consumers, inputs placed ahead of the span that first consumes them and
// outputs emitted right after their producer. Contracts start empty.
AnnotatedProgram generate_program(const Model& m, const std::vector<Loop>& loops);

// A non-inductive fact to attach at the first assignment of its variables.
struct LoopAssumption {
    Predicate pred;
    std::string origin;
};

// Places contracts by the placement rules: each loop's inductive invariant
// becomes a require at span start and an ensure at span end, the plant model
// an assumed update at span end; non-inductive assumptions anchor where their
// variables first appear. Previously placed contracts of these roles are
// replaced, so the operation is idempotent. A loop without an invariant is an
// error unless skip_missing_invariants is set (the pipeline records such
// loops separately and leaves them unannotated).
AnnotatedProgram place_annotations(const AnnotatedProgram& prog, const Model& m,
                                   const std::vector<Loop>& loops,
                                   const std::vector<LoopAssumption>& assumptions = {},
                                   bool skip_missing_invariants = false);

enum class EmitStyle { MatlabLike, MachineVc };

// MatlabLike reproduces the annotated-listing convention (`/*@ ... */`
// contract blocks, `saturate(...)`); MachineVc is the line-oriented form
// consumed by the verifier (see vcfile.hpp for the reader). Both are
// deterministic, newline-terminated UTF-8.
std::string emit_text(const AnnotatedProgram& prog, EmitStyle style);

}  // namespace credo
