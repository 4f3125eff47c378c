#include "credo/expr.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "credo/errors.hpp"

namespace credo {

namespace {

Expr make(ExprKind kind, std::vector<Expr> args) {
    auto n = std::make_shared<ExprNode>();
    n->kind = kind;
    n->args = std::move(args);
    return n;
}

}  // namespace

Expr var(std::string name) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Var;
    n->name = std::move(name);
    return n;
}

Expr cst(Matrix value, std::string symbol) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Const;
    n->value = std::move(value);
    n->name = std::move(symbol);
    return n;
}

Expr cst(double scalar_value) { return cst(Matrix{{scalar_value}}); }

Expr neg(Expr e) { return make(ExprKind::Neg, {std::move(e)}); }
Expr add(Expr a, Expr b) { return make(ExprKind::Add, {std::move(a), std::move(b)}); }
Expr sub(Expr a, Expr b) { return make(ExprKind::Sub, {std::move(a), std::move(b)}); }
Expr mul(Expr a, Expr b) { return make(ExprKind::Mul, {std::move(a), std::move(b)}); }
Expr div(Expr a, Expr b) { return make(ExprKind::Div, {std::move(a), std::move(b)}); }
Expr transpose(Expr e) { return make(ExprKind::Transpose, {std::move(e)}); }

Expr vcat(std::vector<Expr> parts) {
    if (parts.empty()) throw ValidationError("empty vertical stack");
    if (parts.size() == 1) return parts.front();
    return make(ExprKind::Vcat, std::move(parts));
}

Expr dot(Expr a, Expr b) { return make(ExprKind::Dot, {std::move(a), std::move(b)}); }

Expr quad(Matrix shape, Expr e, std::string symbol) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Quad;
    n->value = std::move(shape);
    n->name = std::move(symbol);
    n->args = {std::move(e)};
    return n;
}

Expr sat(Expr e, double lo, double hi) {
    if (!(lo < hi)) throw ValidationError("sat bounds must satisfy lo < hi");
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Sat;
    n->sat_lo = lo;
    n->sat_hi = hi;
    n->args = {std::move(e)};
    return n;
}

Expr sin_expr(Expr e) { return make(ExprKind::Sin, {std::move(e)}); }
Expr cos_expr(Expr e) { return make(ExprKind::Cos, {std::move(e)}); }

Expr apply(std::string fn, std::vector<Expr> args) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Apply;
    n->name = std::move(fn);
    n->args = std::move(args);
    return n;
}

std::string Shape::str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

// ---- shape checking ---------------------------------------------------------

Shape shape_of(const Expr& e, const ShapeEnv& env) {
    switch (e->kind) {
        case ExprKind::Var: {
            auto it = env.vars.find(e->name);
            if (it == env.vars.end()) {
                throw DimensionError("unknown variable '" + e->name + "'");
            }
            return it->second;
        }
        case ExprKind::Const:
            return {e->value.rows(), e->value.cols()};
        case ExprKind::Neg:
        case ExprKind::Sat:
        case ExprKind::Sin:
        case ExprKind::Cos:
            return shape_of(e->args[0], env);
        case ExprKind::Add:
        case ExprKind::Sub: {
            const Shape a = shape_of(e->args[0], env);
            const Shape b = shape_of(e->args[1], env);
            if (!(a == b)) {
                throw DimensionError("cannot add/subtract " + a.str() + " with " + b.str());
            }
            return a;
        }
        case ExprKind::Mul: {
            const Shape a = shape_of(e->args[0], env);
            const Shape b = shape_of(e->args[1], env);
            if (a.is_scalar()) return b;
            if (b.is_scalar()) return a;
            if (a.cols != b.rows) {
                throw DimensionError("cannot multiply " + a.str() + " with " + b.str());
            }
            return {a.rows, b.cols};
        }
        case ExprKind::Div: {
            const Shape a = shape_of(e->args[0], env);
            const Shape b = shape_of(e->args[1], env);
            if (!b.is_scalar()) {
                throw DimensionError("division by non-scalar " + b.str());
            }
            return a;
        }
        case ExprKind::Transpose: {
            const Shape a = shape_of(e->args[0], env);
            return {a.cols, a.rows};
        }
        case ExprKind::Vcat: {
            Shape s = shape_of(e->args[0], env);
            for (std::size_t i = 1; i < e->args.size(); ++i) {
                const Shape t = shape_of(e->args[i], env);
                if (t.cols != s.cols) {
                    throw DimensionError("ragged stack: " + s.str() + " over " + t.str());
                }
                s.rows += t.rows;
            }
            return s;
        }
        case ExprKind::Dot: {
            const Shape a = shape_of(e->args[0], env);
            const Shape b = shape_of(e->args[1], env);
            if (!a.is_column() || !(a == b)) {
                throw DimensionError("dot of " + a.str() + " with " + b.str());
            }
            return {1, 1};
        }
        case ExprKind::Quad: {
            const Shape a = shape_of(e->args[0], env);
            if (!a.is_column() || e->value.rows() != a.rows || e->value.cols() != a.rows) {
                throw DimensionError("quadratic form " +
                                     std::to_string(e->value.rows()) + "x" +
                                     std::to_string(e->value.cols()) + " over " + a.str());
            }
            return {1, 1};
        }
        case ExprKind::Apply: {
            auto ar = env.fn_arity.find(e->name);
            auto rs = env.fn_results.find(e->name);
            if (ar == env.fn_arity.end() || rs == env.fn_results.end()) {
                throw DimensionError("unknown external function '" + e->name + "'");
            }
            if (ar->second != e->args.size()) {
                throw DimensionError("'" + e->name + "' expects " +
                                     std::to_string(ar->second) + " arguments, got " +
                                     std::to_string(e->args.size()));
            }
            for (const Expr& a : e->args) shape_of(a, env);
            return rs->second;
        }
    }
    throw Error("unreachable expression kind");
}

// ---- point evaluation -------------------------------------------------------

namespace {

Matrix componentwise(const Matrix& m, double (*f)(double)) {
    Matrix r = m;
    for (double& v : r.data()) v = f(v);
    return r;
}

}  // namespace

Matrix eval(const Expr& e, const EvalEnv& env) {
    switch (e->kind) {
        case ExprKind::Var: {
            auto it = env.vars.find(e->name);
            if (it == env.vars.end()) {
                throw Error("unbound variable '" + e->name + "' in evaluation");
            }
            return it->second;
        }
        case ExprKind::Const:
            return e->value;
        case ExprKind::Neg:
            return -eval(e->args[0], env);
        case ExprKind::Add:
            return eval(e->args[0], env) + eval(e->args[1], env);
        case ExprKind::Sub:
            return eval(e->args[0], env) - eval(e->args[1], env);
        case ExprKind::Mul: {
            const Matrix a = eval(e->args[0], env);
            const Matrix b = eval(e->args[1], env);
            if (a.is_scalar()) return b * a.scalar();
            if (b.is_scalar()) return a * b.scalar();
            return a * b;
        }
        case ExprKind::Div: {
            const Matrix a = eval(e->args[0], env);
            const double d = eval(e->args[1], env).scalar();
            if (d == 0.0) throw Error("division by zero in evaluation");
            return a * (1.0 / d);
        }
        case ExprKind::Transpose:
            return eval(e->args[0], env).transpose();
        case ExprKind::Vcat: {
            Matrix m = eval(e->args[0], env);
            for (std::size_t i = 1; i < e->args.size(); ++i) {
                m = Matrix::vstack(m, eval(e->args[i], env));
            }
            return m;
        }
        case ExprKind::Dot: {
            const Matrix a = eval(e->args[0], env);
            const Matrix b = eval(e->args[1], env);
            return a.transpose() * b;
        }
        case ExprKind::Quad: {
            const Matrix x = eval(e->args[0], env);
            return x.transpose() * e->value * x;
        }
        case ExprKind::Sat: {
            Matrix m = eval(e->args[0], env);
            for (double& v : m.data()) {
                v = std::min(std::max(v, e->sat_lo), e->sat_hi);
            }
            return m;
        }
        case ExprKind::Sin:
            return componentwise(eval(e->args[0], env), std::sin);
        case ExprKind::Cos:
            return componentwise(eval(e->args[0], env), std::cos);
        case ExprKind::Apply: {
            auto it = env.fns.find(e->name);
            if (it == env.fns.end()) {
                throw Error("unbound external function '" + e->name + "' in evaluation");
            }
            std::vector<Matrix> args;
            args.reserve(e->args.size());
            for (const Expr& a : e->args) args.push_back(eval(a, env));
            return it->second(args);
        }
    }
    throw Error("unreachable expression kind");
}

// ---- interval evaluation ----------------------------------------------------

Interval IntervalMatrix::scalar() const {
    if (rows != 1 || cols != 1) {
        throw DimensionError("interval scalar() on " + std::to_string(rows) + "x" +
                             std::to_string(cols));
    }
    return data[0];
}

namespace {

IntervalMatrix lift(const Matrix& m) {
    IntervalMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r.at(i, j) = Interval::point(m(i, j));
    return r;
}

IntervalMatrix imul(const IntervalMatrix& a, const IntervalMatrix& b) {
    if (a.rows == 1 && a.cols == 1) {
        IntervalMatrix r(b.rows, b.cols);
        for (std::size_t k = 0; k < b.data.size(); ++k) r.data[k] = a.data[0] * b.data[k];
        return r;
    }
    if (b.rows == 1 && b.cols == 1) return imul(b, a);
    if (a.cols != b.rows) {
        throw DimensionError("interval product " + std::to_string(a.rows) + "x" +
                             std::to_string(a.cols) + " with " + std::to_string(b.rows) +
                             "x" + std::to_string(b.cols));
    }
    IntervalMatrix r(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < b.cols; ++j) {
            Interval s = Interval::point(0.0);
            for (std::size_t k = 0; k < a.cols; ++k) s = s + a.at(i, k) * b.at(k, j);
            r.at(i, j) = s;
        }
    }
    return r;
}

}  // namespace

IntervalMatrix eval_interval(const Expr& e, const IntervalEnv& env) {
    switch (e->kind) {
        case ExprKind::Var: {
            auto it = env.vars.find(e->name);
            if (it == env.vars.end()) {
                throw Error("unbound variable '" + e->name + "' in interval evaluation");
            }
            return it->second;
        }
        case ExprKind::Const:
            return lift(e->value);
        case ExprKind::Neg: {
            IntervalMatrix m = eval_interval(e->args[0], env);
            for (Interval& v : m.data) v = -v;
            return m;
        }
        case ExprKind::Add: {
            IntervalMatrix a = eval_interval(e->args[0], env);
            const IntervalMatrix b = eval_interval(e->args[1], env);
            if (a.rows != b.rows || a.cols != b.cols) {
                throw DimensionError("interval add shape mismatch");
            }
            for (std::size_t k = 0; k < a.data.size(); ++k) a.data[k] = a.data[k] + b.data[k];
            return a;
        }
        case ExprKind::Sub: {
            IntervalMatrix a = eval_interval(e->args[0], env);
            const IntervalMatrix b = eval_interval(e->args[1], env);
            if (a.rows != b.rows || a.cols != b.cols) {
                throw DimensionError("interval sub shape mismatch");
            }
            for (std::size_t k = 0; k < a.data.size(); ++k) a.data[k] = a.data[k] - b.data[k];
            return a;
        }
        case ExprKind::Mul:
            return imul(eval_interval(e->args[0], env), eval_interval(e->args[1], env));
        case ExprKind::Div: {
            IntervalMatrix a = eval_interval(e->args[0], env);
            const Interval d = eval_interval(e->args[1], env).scalar();
            for (Interval& v : a.data) v = v / d;
            return a;
        }
        case ExprKind::Transpose: {
            const IntervalMatrix a = eval_interval(e->args[0], env);
            IntervalMatrix r(a.cols, a.rows);
            for (std::size_t i = 0; i < a.rows; ++i)
                for (std::size_t j = 0; j < a.cols; ++j) r.at(j, i) = a.at(i, j);
            return r;
        }
        case ExprKind::Vcat: {
            std::vector<IntervalMatrix> parts;
            std::size_t rows = 0;
            for (const Expr& p : e->args) {
                parts.push_back(eval_interval(p, env));
                rows += parts.back().rows;
            }
            IntervalMatrix r(rows, parts.front().cols);
            std::size_t off = 0;
            for (const IntervalMatrix& p : parts) {
                for (std::size_t i = 0; i < p.rows; ++i)
                    for (std::size_t j = 0; j < p.cols; ++j) r.at(off + i, j) = p.at(i, j);
                off += p.rows;
            }
            return r;
        }
        case ExprKind::Dot: {
            const IntervalMatrix a = eval_interval(e->args[0], env);
            IntervalMatrix r(1, 1);
            Interval s = Interval::point(0.0);
            if (struct_eq(e->args[0], e->args[1])) {
                for (const Interval& v : a.data) s = s + sqr(v);
            } else {
                const IntervalMatrix b = eval_interval(e->args[1], env);
                if (a.rows != b.rows || a.cols != 1 || b.cols != 1) {
                    throw DimensionError("interval dot shape mismatch");
                }
                for (std::size_t i = 0; i < a.rows; ++i) s = s + a.data[i] * b.data[i];
            }
            r.data[0] = s;
            return r;
        }
        case ExprKind::Quad: {
            const IntervalMatrix x = eval_interval(e->args[0], env);
            const Matrix& p = e->value;
            Interval s = Interval::point(0.0);
            // diagonal via the square rule, off-diagonal pairs folded together
            for (std::size_t i = 0; i < x.rows; ++i) {
                s = s + Interval::point(p(i, i)) * sqr(x.data[i]);
                for (std::size_t j = i + 1; j < x.rows; ++j) {
                    s = s + Interval::point(p(i, j) + p(j, i)) * (x.data[i] * x.data[j]);
                }
            }
            IntervalMatrix r(1, 1);
            r.data[0] = s;
            return r;
        }
        case ExprKind::Sat: {
            IntervalMatrix m = eval_interval(e->args[0], env);
            for (Interval& v : m.data) v = sat(v, e->sat_lo, e->sat_hi);
            return m;
        }
        case ExprKind::Sin: {
            IntervalMatrix m = eval_interval(e->args[0], env);
            for (Interval& v : m.data) v = sin(v);
            return m;
        }
        case ExprKind::Cos: {
            IntervalMatrix m = eval_interval(e->args[0], env);
            for (Interval& v : m.data) v = cos(v);
            return m;
        }
        case ExprKind::Apply:
            throw UninterpretedFunction{e->name};
    }
    throw Error("unreachable expression kind");
}

// ---- structural helpers -----------------------------------------------------

bool struct_eq(const Expr& a, const Expr& b) {
    if (a.get() == b.get()) return true;
    if (a->kind != b->kind || a->name != b->name) return false;
    if (a->kind == ExprKind::Const || a->kind == ExprKind::Quad) {
        if (!(a->value == b->value)) return false;
    }
    if (a->kind == ExprKind::Sat && (a->sat_lo != b->sat_lo || a->sat_hi != b->sat_hi)) {
        return false;
    }
    if (a->args.size() != b->args.size()) return false;
    for (std::size_t i = 0; i < a->args.size(); ++i) {
        if (!struct_eq(a->args[i], b->args[i])) return false;
    }
    return true;
}

void collect_free_vars(const Expr& e, std::set<std::string>& out) {
    if (e->kind == ExprKind::Var) {
        out.insert(e->name);
        return;
    }
    for (const Expr& a : e->args) collect_free_vars(a, out);
}

std::set<std::string> free_vars(const Expr& e) {
    std::set<std::string> out;
    collect_free_vars(e, out);
    return out;
}

Expr substitute(const Expr& e, const std::string& name, const Expr& replacement) {
    if (e->kind == ExprKind::Var) {
        return e->name == name ? replacement : e;
    }
    bool changed = false;
    std::vector<Expr> args;
    args.reserve(e->args.size());
    for (const Expr& a : e->args) {
        Expr s = substitute(a, name, replacement);
        changed = changed || s.get() != a.get();
        args.push_back(std::move(s));
    }
    if (!changed) return e;
    auto n = std::make_shared<ExprNode>(*e);
    n->args = std::move(args);
    return n;
}

// ---- predicates -------------------------------------------------------------

Predicate pred_le(Expr lhs, Expr rhs) {
    Predicate p;
    p.conjuncts.push_back({std::move(lhs), std::move(rhs)});
    return p;
}

Predicate pred_and(Predicate a, const Predicate& b) {
    for (const Comparison& c : b.conjuncts) a.conjuncts.push_back(c);
    return a;
}

std::set<std::string> free_vars(const Predicate& p) {
    std::set<std::string> out;
    for (const Comparison& c : p.conjuncts) {
        collect_free_vars(c.lhs, out);
        collect_free_vars(c.rhs, out);
    }
    return out;
}

Predicate substitute(const Predicate& p, const std::string& name, const Expr& replacement) {
    Predicate out;
    for (const Comparison& c : p.conjuncts) {
        out.conjuncts.push_back(
            {substitute(c.lhs, name, replacement), substitute(c.rhs, name, replacement)});
    }
    return out;
}

bool struct_eq(const Predicate& a, const Predicate& b) {
    if (a.conjuncts.size() != b.conjuncts.size()) return false;
    for (std::size_t i = 0; i < a.conjuncts.size(); ++i) {
        if (!struct_eq(a.conjuncts[i].lhs, b.conjuncts[i].lhs) ||
            !struct_eq(a.conjuncts[i].rhs, b.conjuncts[i].rhs)) {
            return false;
        }
    }
    return true;
}

bool eval(const Predicate& p, const EvalEnv& env, double tol) {
    for (const Comparison& c : p.conjuncts) {
        if (eval(c.lhs, env).scalar() > eval(c.rhs, env).scalar() + tol) return false;
    }
    return true;
}

// ---- printing ---------------------------------------------------------------

std::string format_double(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

namespace {

// precedence: 0 add/sub, 1 mul/div, 2 unary minus, 3 postfix/atom
int precedence(const Expr& e) {
    switch (e->kind) {
        case ExprKind::Add:
        case ExprKind::Sub:
            return 0;
        case ExprKind::Mul:
        case ExprKind::Div:
        case ExprKind::Dot:
        case ExprKind::Quad:
            return 1;
        case ExprKind::Neg:
            return 2;
        default:
            return 3;
    }
}

void print_expr(std::ostringstream& os, const Expr& e, const PrintStyle& style, int parent_prec);

void print_wrapped(std::ostringstream& os, const Expr& e, const PrintStyle& style,
                   int parent_prec) {
    print_expr(os, e, style, parent_prec);
}

void print_const(std::ostringstream& os, const Matrix& m) {
    if (m.is_scalar()) {
        os << format_double(m.scalar());
        return;
    }
    if (m.cols() == 1) {
        os << "[";
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i) os << ", ";
            os << format_double(m[i]);
        }
        os << "]";
        return;
    }
    os << "[";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (i) os << ", ";
        os << "[";
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) os << ", ";
            os << format_double(m(i, j));
        }
        os << "]";
    }
    os << "]";
}

void print_postfix_operand(std::ostringstream& os, const Expr& e, const PrintStyle& style) {
    // operands of ' must be atoms; wrap anything looser
    if (precedence(e) < 3) {
        os << "(";
        print_expr(os, e, style, 0);
        os << ")";
    } else {
        print_expr(os, e, style, 3);
    }
}

void print_expr(std::ostringstream& os, const Expr& e, const PrintStyle& style,
                int parent_prec) {
    const int prec = precedence(e);
    const bool need_parens = prec < parent_prec;
    if (need_parens) os << "(";
    switch (e->kind) {
        case ExprKind::Var:
            os << e->name;
            break;
        case ExprKind::Const:
            if (!e->name.empty()) {
                os << e->name;
            } else {
                print_const(os, e->value);
            }
            break;
        case ExprKind::Neg:
            os << "-";
            print_wrapped(os, e->args[0], style, 2 + 1);
            break;
        case ExprKind::Add:
            print_wrapped(os, e->args[0], style, 0);
            os << " + ";
            print_wrapped(os, e->args[1], style, 0 + 1);
            break;
        case ExprKind::Sub:
            print_wrapped(os, e->args[0], style, 0);
            os << " - ";
            print_wrapped(os, e->args[1], style, 0 + 1);
            break;
        case ExprKind::Mul:
            print_wrapped(os, e->args[0], style, 1);
            os << "*";
            print_wrapped(os, e->args[1], style, 1 + 1);
            break;
        case ExprKind::Div:
            print_wrapped(os, e->args[0], style, 1);
            os << "/";
            print_wrapped(os, e->args[1], style, 1 + 1);
            break;
        case ExprKind::Transpose:
            print_postfix_operand(os, e->args[0], style);
            os << "'";
            break;
        case ExprKind::Vcat:
            os << "[";
            for (std::size_t i = 0; i < e->args.size(); ++i) {
                if (i) os << "; ";
                print_expr(os, e->args[i], style, 0);
            }
            os << "]";
            break;
        case ExprKind::Dot:
            print_postfix_operand(os, e->args[0], style);
            os << "'*";
            print_wrapped(os, e->args[1], style, 1 + 1);
            break;
        case ExprKind::Quad: {
            print_postfix_operand(os, e->args[0], style);
            os << "'*";
            if (!e->name.empty()) {
                os << e->name;
            } else {
                print_const(os, e->value);
            }
            os << "*";
            print_wrapped(os, e->args[0], style, 1 + 1);
            break;
        }
        case ExprKind::Sat:
            if (style.matlab_sat) {
                os << "saturate(";
                print_expr(os, e->args[0], style, 0);
                os << ")";
            } else {
                os << "sat(";
                print_expr(os, e->args[0], style, 0);
                os << ", " << format_double(e->sat_lo) << ", " << format_double(e->sat_hi)
                   << ")";
            }
            break;
        case ExprKind::Sin:
            os << "sin(";
            print_expr(os, e->args[0], style, 0);
            os << ")";
            break;
        case ExprKind::Cos:
            os << "cos(";
            print_expr(os, e->args[0], style, 0);
            os << ")";
            break;
        case ExprKind::Apply:
            os << e->name << "(";
            for (std::size_t i = 0; i < e->args.size(); ++i) {
                if (i) os << ", ";
                print_expr(os, e->args[i], style, 0);
            }
            os << ")";
            break;
    }
    if (need_parens) os << ")";
}

}  // namespace

std::string to_string(const Expr& e, const PrintStyle& style) {
    std::ostringstream os;
    print_expr(os, e, style, 0);
    return os.str();
}

std::string to_string(const Predicate& p, const PrintStyle& style) {
    std::ostringstream os;
    for (std::size_t i = 0; i < p.conjuncts.size(); ++i) {
        if (i) os << " && ";
        os << to_string(p.conjuncts[i].lhs, style) << " <= "
           << to_string(p.conjuncts[i].rhs, style);
    }
    return os.str();
}

}  // namespace credo
