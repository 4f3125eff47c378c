#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "credo/expr.hpp"
#include "credo/matrix.hpp"

namespace credo {

// ---- signals -----------------------------------------------------------------

struct Signal {
    std::string name;
    std::size_t rows = 1;
    std::size_t cols = 1;   // > 1 only for matrix-valued external results
    bool is_input = false;  // produced by the environment each cycle
    bool is_output = false;
    bool is_temp = false;   // fused into its consumer's expression by codegen
    int line = 0;

    Shape shape() const { return {rows, cols}; }
};

// ---- blocks ------------------------------------------------------------------

enum class BlockKind { Gain, Sum, Product, Saturation, Trig, Constant, External };

struct Block {
    std::string name;
    BlockKind kind = BlockKind::Sum;
    std::vector<std::string> inputs;   // signal names, in port order
    std::string output;                // single output port
    std::string subsystem;             // loop membership label; empty = glue

    // kind-specific payload
    std::string gain_ref;              // Gain: binding name ("auto" allowed) …
    std::optional<Matrix> gain_value;  // … or a literal matrix
    std::vector<int> sum_signs;        // Sum: +1/-1 per input (default all +1)
    bool product_transpose_first = false;  // Product: first operand transposed
    double sat_lo = -1.0, sat_hi = 1.0;    // Saturation
    bool trig_is_sin = true;               // Trig
    std::string const_ref;                 // Constant: binding name …
    std::optional<Matrix> const_value;     // … or literal
    std::string external_fn;               // External: declared function name
    int line = 0;
};

// ---- annotation blocks ---------------------------------------------------------

enum class AnnotationKind { LinearPlant, GeneralPlant, EllipsoidObserver, GeneralObserver };

struct AnnotationBlock {
    std::string name;
    AnnotationKind kind = AnnotationKind::GeneralObserver;
    std::string subsystem;  // plants: which controller subsystem closes the loop

    // LinearPlant: x+ = A x + B u, y = C x + D u (C defaults to I, D to 0).
    // Matrices may be deferred ("auto") and resolved by the pipeline.
    std::optional<Matrix> a, b, c, d;
    bool auto_linear = false;
    std::vector<std::string> plant_inputs;   // u-port signals
    std::vector<std::string> plant_outputs;  // y-port signals (state aliases)

    // GeneralPlant: state <- update(state, inputs)
    std::string state_signal;
    Expr update;

    // Observers
    std::vector<std::string> watch;
    std::optional<Matrix> ellipsoid_shape;  // EllipsoidObserver ("auto" allowed)
    bool auto_ellipsoid = false;
    Predicate observer_pred;                // GeneralObserver

    int line = 0;
};

// ---- external function declarations --------------------------------------------

struct ExternalDecl {
    std::string name;
    std::size_t arity = 0;
    std::size_t result_rows = 1;
    std::size_t result_cols = 1;
    int line = 0;
};

// ---- bindings -------------------------------------------------------------------

struct Binding {
    std::string name;
    std::optional<Matrix> value;  // empty while "auto"
    bool is_auto = false;
    int line = 0;
};

// ---- the model ------------------------------------------------------------------

struct Model {
    std::string name;
    std::vector<Signal> signals;
    std::vector<Block> blocks;
    std::vector<AnnotationBlock> annotations;
    std::vector<ExternalDecl> externals;
    std::vector<Binding> bindings;
    std::vector<std::string> division_guards;  // recorded nonzero-denominator notes

    const Signal* find_signal(const std::string& n) const;
    const Binding* find_binding(const std::string& n) const;
    Binding* find_binding(const std::string& n);
    const ExternalDecl* find_external(const std::string& n) const;

    // Resolved binding value; throws ValidationError for missing/auto bindings.
    Matrix binding_value(const std::string& n) const;

    ShapeEnv shape_env() const;
    std::map<std::string, Matrix> constants() const;  // resolved bindings only
    double sat_default() const;                       // c_sat binding, default 1
};

// A verification loop: controller blocks closed by a plant annotation.
struct Loop {
    std::string subsystem;
    std::vector<std::size_t> controller_blocks;  // indices into model.blocks
    std::size_t plant = 0;                       // index into model.annotations
    std::vector<std::size_t> observers;          // attached observer indices

    // Inductive invariant: from a GeneralObserver or synthesized (ellipsoid).
    Predicate invariant;
    bool invariant_known = false;
};

struct Diagnostic {
    int line = 0;
    std::string field;
    std::string message;
};

std::string to_string(const Diagnostic& d);

}  // namespace credo
