#pragma once

#include "credo/expr.hpp"

namespace credo {

// Syntactic simplifier: flattens associative-commutative sums, merges
// structurally equal terms by coefficient (so t - t cancels), folds numeric
// constants (including scalar factors like dt*(1/Iw)) and drops neutral
// elements. Value-preserving in real arithmetic; idempotent.
//
// `shapes`, when provided, lets a fully cancelled sum collapse to a zero
// matrix of the right dimensions; without it the scalar 0 is used.
Expr simplify(const Expr& e, const ShapeEnv* shapes = nullptr);

Predicate simplify(const Predicate& p, const ShapeEnv* shapes = nullptr);

}  // namespace credo
