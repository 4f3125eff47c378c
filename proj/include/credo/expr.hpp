#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "credo/interval.hpp"
#include "credo/matrix.hpp"

namespace credo {

// Scalar-and-vector expression AST shared by model files, contracts and the
// machine-vc format. Values are matrices: scalars are 1x1, vectors n x 1.
enum class ExprKind {
    Var,        // named signal/program variable
    Const,      // matrix literal, optionally carrying a symbolic name
    Neg,
    Add,
    Sub,
    Mul,        // matrix product; either side may be scalar (1x1)
    Div,        // denominator must be scalar
    Transpose,
    Vcat,       // [a; b; ...] vertical stacking
    Dot,        // a'b for column vectors (normalized form of T(a)*b)
    Quad,       // e'Pe with a constant shape matrix (normalized a'*P*a)
    Sat,        // componentwise clamp to [sat_lo, sat_hi]
    Sin,
    Cos,
    Apply,      // external function call
};

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    ExprKind kind;
    std::string name;        // Var name / Apply function name / Const symbol
    Matrix value;            // Const payload; Quad shape matrix
    double sat_lo = -1.0;
    double sat_hi = 1.0;
    std::vector<Expr> args;
};

// ---- constructors ----------------------------------------------------------

Expr var(std::string name);
Expr cst(Matrix value, std::string symbol = "");
Expr cst(double scalar_value);
Expr neg(Expr e);
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr div(Expr a, Expr b);
Expr transpose(Expr e);
Expr vcat(std::vector<Expr> parts);
Expr dot(Expr a, Expr b);
Expr quad(Matrix shape, Expr e, std::string symbol = "");
Expr sat(Expr e, double lo, double hi);
Expr sin_expr(Expr e);
Expr cos_expr(Expr e);
Expr apply(std::string fn, std::vector<Expr> args);

// ---- shapes ----------------------------------------------------------------

struct Shape {
    std::size_t rows = 0;
    std::size_t cols = 0;
    bool operator==(const Shape&) const = default;
    bool is_scalar() const { return rows == 1 && cols == 1; }
    bool is_column() const { return cols == 1; }
    std::string str() const;
};

struct ShapeEnv {
    std::map<std::string, Shape> vars;
    std::map<std::string, Shape> fn_results;       // external name -> result shape
    std::map<std::string, std::size_t> fn_arity;   // external name -> arity
};

// Dimension check; throws DimensionError naming the offending subexpression.
Shape shape_of(const Expr& e, const ShapeEnv& env);

// ---- evaluation ------------------------------------------------------------

using ExternalFn = std::function<Matrix(const std::vector<Matrix>&)>;

struct EvalEnv {
    std::map<std::string, Matrix> vars;
    std::map<std::string, ExternalFn> fns;
};

Matrix eval(const Expr& e, const EvalEnv& env);

// Interval-valued matrix for the certification engine.
struct IntervalMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Interval> data;

    IntervalMatrix() = default;
    IntervalMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}
    Interval& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const Interval& at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    Interval scalar() const;
};

// Thrown when interval evaluation meets an uninterpreted external call.
struct UninterpretedFunction {
    std::string name;
};

struct IntervalEnv {
    std::map<std::string, IntervalMatrix> vars;
};

// Interval extension; propagates ZeroDivisionInterval from interval division
// and UninterpretedFunction from Apply nodes. Dot(e, e) and the diagonal of
// Quad use the square rule instead of the naive product.
IntervalMatrix eval_interval(const Expr& e, const IntervalEnv& env);

// ---- structural helpers ----------------------------------------------------

bool struct_eq(const Expr& a, const Expr& b);
void collect_free_vars(const Expr& e, std::set<std::string>& out);
std::set<std::string> free_vars(const Expr& e);
Expr substitute(const Expr& e, const std::string& name, const Expr& replacement);

// ---- predicates -------------------------------------------------------------

// lhs <= rhs over scalar expressions.
struct Comparison {
    Expr lhs;
    Expr rhs;
};

// Conjunction of comparisons. A single comparison is a one-element conjunction.
struct Predicate {
    std::vector<Comparison> conjuncts;
};

Predicate pred_le(Expr lhs, Expr rhs);
Predicate pred_and(Predicate a, const Predicate& b);
std::set<std::string> free_vars(const Predicate& p);
Predicate substitute(const Predicate& p, const std::string& name, const Expr& replacement);
bool struct_eq(const Predicate& a, const Predicate& b);
bool eval(const Predicate& p, const EvalEnv& env, double tol = 0.0);

// ---- printing ---------------------------------------------------------------

struct PrintStyle {
    bool matlab_sat = false;   // print `saturate(e)` instead of `sat(e, lo, hi)`
};

std::string to_string(const Expr& e, const PrintStyle& style = {});
std::string to_string(const Predicate& p, const PrintStyle& style = {});
std::string format_double(double v);  // shortest round-trip decimal

}  // namespace credo
