#pragma once

#include <map>
#include <string>
#include <vector>

#include "credo/expr.hpp"
#include "credo/model.hpp"

namespace credo {

enum class StatementKind { Input, Assign, Output };

struct Statement {
    StatementKind kind = StatementKind::Assign;
    std::string var;   // Input/Assign target
    Expr expr;         // Assign right-hand side / Output argument
    std::string source;  // originating block or signal name
};

enum class ContractKind { Require, Assume, Ensure };

// Provenance of a contract; drives VC pairing and report text.
enum class ContractRole {
    InsertedRequire,   // inductive invariant at loop-span start
    InsertedEnsure,    // inductive invariant at loop-span end
    StepEnsure,        // forward-propagated ellipsoid at a statement
    PlantPre,          // forward-propagated ellipsoid restated before the plant
    StrongestPost,     // forward image after the plant update
    PlantUpdate,       // plant model as an assumed state update
    BackwardWp,        // backward-propagated weakest precondition
    Assumption,        // non-inductive observer fact
};

// Contracts attach to a statement: `before` blocks print ahead of it,
// `after` blocks behind it. requires describe the pre-state of their
// anchor, ensures the post-state (plant updates included).
struct Contract {
    ContractKind kind = ContractKind::Require;
    ContractRole role = ContractRole::Assumption;
    Predicate pred;          // Require/Ensure payload
    std::string update_var;  // Assume payload: var = update_expr
    Expr update_expr;
    std::size_t anchor = 0;
    bool before = true;
    std::string loop_id;
};

struct LoopSpan {
    std::string id;
    std::size_t first = 0;  // statement indices, inclusive
    std::size_t last = 0;
};

struct AnnotatedProgram {
    std::string model_name;
    std::vector<Statement> statements;
    std::vector<Contract> contracts;
    std::vector<LoopSpan> spans;

    std::map<std::string, Shape> var_shapes;
    std::map<std::string, Matrix> constants;   // named constants (gains, dt, ...)
    std::vector<ExternalDecl> externals;

    ShapeEnv shape_env() const;
    const LoopSpan* find_span(const std::string& id) const;
};

// Every contract's free variables must be assigned (or be inputs) before the
// contract's anchor. Returns the offending variable names, empty when clean.
std::vector<std::string> def_before_use_violations(const AnnotatedProgram& prog);

bool program_equal(const AnnotatedProgram& a, const AnnotatedProgram& b);

// Structural comparison insensitive to variable renaming: variables are
// canonicalized by first-occurrence order on both sides first.
bool program_equal_modulo_renaming(const AnnotatedProgram& a, const AnnotatedProgram& b);

// Contract-skeleton comparison: additionally ignores constant payloads
// (matrices compare by shape only), so synthesized gains may drift without
// breaking the structural golden.
bool program_skeleton_equal(const AnnotatedProgram& a, const AnnotatedProgram& b);

}  // namespace credo
