#include <cmath>

#include "doctest.h"

#include "credo/errors.hpp"
#include "credo/expr.hpp"
#include "credo/expr_parse.hpp"
#include "credo/rng.hpp"
#include "credo/simplify.hpp"

using namespace credo;

namespace {

ParserSymbols car_symbols() {
    ParserSymbols sym;
    sym.shapes.vars = {
        {"xtilde", {3, 1}}, {"utilde", {2, 1}}, {"u", {2, 1}},     {"x", {3, 1}},
        {"z", {2, 1}},      {"f", {3, 1}},      {"dphi", {3, 2}},  {"friction", {2, 1}},
        {"torque", {2, 1}}, {"a", {1, 1}},      {"b", {1, 1}},     {"c", {1, 1}},
    };
    sym.shapes.fn_arity = {{"f_func", 2}, {"dphi_func", 2}, {"friction_func", 2}};
    sym.shapes.fn_results = {{"f_func", {3, 1}}, {"dphi_func", {3, 2}},
                             {"friction_func", {2, 1}}};
    sym.constants = {
        {"dt", Matrix{{0.01}}},
        {"Iw", Matrix{{1.8}}},
        {"r", Matrix{{0.3}}},
        {"P", Matrix::identity(3)},
        {"Q1", Matrix::identity(5)},
        {"K", Matrix{{1, 0, 0}, {0, 1, 0}}},
        {"uss", Matrix::column({0.0, 0.1})},
    };
    return sym;
}

}  // namespace

TEST_CASE("parse print parse is a fixpoint") {
    const ParserSymbols sym = car_symbols();
    const char* cases[] = {
        "xtilde'*P*xtilde",
        "[xtilde; utilde]'*Q1*[xtilde; utilde]",
        "z'*z",
        "K*xtilde",
        "utilde + uss",
        "r*friction + Iw*(dphi'*f) - sat(z)",
        "z + dt*(1/Iw*(torque - r*friction_func(x, u) - Iw*(dphi_func(x, u)'*f_func(x, u))))",
        "sin(a) + cos(b)*2.5",
        "-a*b + (a - b)/2",
        "[1, 2, 3]",
        "[[1, 2], [3, 4.5]]",
        "[z; xtilde]",
        "(a + b)'",
        "dphi'*f",
    };
    for (const char* text : cases) {
        CAPTURE(text);
        const Expr e1 = parse_expression(text, sym);
        const std::string printed = to_string(e1);
        const Expr e2 = parse_expression(printed, sym);
        CHECK(struct_eq(e1, e2));
        CHECK(to_string(e2) == printed);
    }
}

TEST_CASE("normalization builds dot and quadratic forms") {
    const ParserSymbols sym = car_symbols();
    const Expr d = parse_expression("z'*z", sym);
    CHECK(d->kind == ExprKind::Dot);
    const Expr q = parse_expression("xtilde'*P*xtilde", sym);
    CHECK(q->kind == ExprKind::Quad);
    CHECK(q->name == "P");
    const Expr vq = parse_expression("[xtilde; utilde]'*Q1*[xtilde; utilde]", sym);
    CHECK(vq->kind == ExprKind::Quad);
    // matrix-valued operand stays a plain product
    const Expr m = parse_expression("dphi'*f", sym);
    CHECK(m->kind == ExprKind::Mul);
    CHECK(m->args[0]->kind == ExprKind::Transpose);
}

TEST_CASE("evaluation matches hand computation") {
    const ParserSymbols sym = car_symbols();
    EvalEnv env;
    env.vars["z"] = Matrix::column({0.3, -0.4});
    env.vars["xtilde"] = Matrix::column({1.0, 2.0, 2.0});

    CHECK(eval(parse_expression("z'*z", sym), env).scalar() == doctest::Approx(0.25));
    CHECK(eval(parse_expression("xtilde'*P*xtilde", sym), env).scalar() ==
          doctest::Approx(9.0));
    CHECK(eval(parse_expression("sat(z)", sym), env)[1] == doctest::Approx(-0.4));
    env.vars["z"] = Matrix::column({3.0, -4.0});
    CHECK(eval(parse_expression("sat(z)", sym), env)[0] == doctest::Approx(1.0));
    CHECK(eval(parse_expression("sat(z)", sym), env)[1] == doctest::Approx(-1.0));

    env.fns["f_func"] = [](const std::vector<Matrix>& args) {
        return args[0] * args[1].scalar();
    };
    env.vars["x"] = Matrix::column({1.0, 1.0, 2.0});
    env.vars["u"] = Matrix{{2.0}};
    CHECK(eval(parse_expression("f_func(x, u)", sym), env)[2] == doctest::Approx(4.0));
}

TEST_CASE("shape checking rejects ill typed expressions") {
    const ParserSymbols sym = car_symbols();
    CHECK_THROWS_AS(shape_of(parse_expression("xtilde + z", sym), sym.shapes),
                    DimensionError);
    CHECK_THROWS_AS(shape_of(parse_expression("z/xtilde", sym), sym.shapes), DimensionError);
    CHECK(shape_of(parse_expression("dphi'*f", sym), sym.shapes) == Shape{2, 1});
    CHECK(shape_of(parse_expression("z'*z", sym), sym.shapes) == Shape{1, 1});
}

TEST_CASE("substitution and free variables") {
    const ParserSymbols sym = car_symbols();
    const Expr e = parse_expression("z + dt*torque", sym);
    const auto fv = free_vars(e);
    CHECK(fv.count("z") == 1);
    CHECK(fv.count("torque") == 1);
    CHECK(fv.count("dt") == 0);  // named constant, not a variable

    const Expr replacement = parse_expression("r*friction - sat(z)", sym);
    const Expr s = substitute(e, "torque", replacement);
    CHECK(free_vars(s).count("friction") == 1);
    CHECK(free_vars(s).count("torque") == 0);
    // substitution into both slots of a dot keeps structural equality
    const Expr d = parse_expression("torque'*torque", sym);
    const Expr ds = substitute(d, "torque", replacement);
    CHECK(ds->kind == ExprKind::Dot);
    CHECK(struct_eq(ds->args[0], ds->args[1]));
}

TEST_CASE("simplifier cancels terms and folds constants") {
    const ParserSymbols sym = car_symbols();
    // (a + b) - a -> b
    const Expr e1 = simplify(parse_expression("(a + b) - a", sym));
    CHECK(to_string(e1) == "b");
    // neutral elements
    CHECK(to_string(simplify(parse_expression("a + 0", sym))) == "a");
    CHECK(to_string(simplify(parse_expression("1*a", sym))) == "a");
    CHECK(to_string(simplify(parse_expression("a - 0*b", sym))) == "a");
    // constant folding incl. division
    CHECK(simplify(parse_expression("2*(1/4)", sym))->value.scalar() ==
          doctest::Approx(0.5));
}

TEST_CASE("simplifier reduces the torque feedforward to the saturation term") {
    const ParserSymbols sym = car_symbols();
    // wp of z'z <= 1 through the torque substitution, as built by backward
    // propagation: all feedforward terms cancel leaving z - (dt/Iw) sat(z)
    const std::string w =
        "z + dt*(1/Iw*((r*friction_func(x, u) + Iw*(dphi_func(x, u)'*f_func(x, u)) - sat(z))"
        " - r*friction_func(x, u) - Iw*(dphi_func(x, u)'*f_func(x, u))))";
    const Expr reduced = simplify(parse_expression(w, sym));
    // expected: z - c*sat(z) with c = dt/Iw
    REQUIRE(reduced->kind == ExprKind::Sub);
    CHECK(to_string(reduced->args[0]) == "z");
    const Expr rhs = reduced->args[1];
    REQUIRE(rhs->kind == ExprKind::Mul);
    CHECK(rhs->args[0]->value.scalar() == doctest::Approx(0.01 / 1.8));
    CHECK(rhs->args[1]->kind == ExprKind::Sat);
}

TEST_CASE("simplifier is idempotent and value preserving") {
    const ParserSymbols sym = car_symbols();
    const char* cases[] = {
        "(a + b) - a",
        "a*2 - b/4 + (a - a)",
        "z + dt*(1/Iw*(torque - r*friction - Iw*(dphi'*f)))",
        "sat(z)'*sat(z) - z'*z",
        "sin(a)*cos(b) - sin(a)*cos(b) + a",
        "2*a*3 + a",
    };
    Rng rng(41);
    for (const char* text : cases) {
        CAPTURE(text);
        const Expr e = parse_expression(text, sym);
        const Expr s1 = simplify(e);
        const Expr s2 = simplify(s1);
        CHECK(struct_eq(s1, s2));
        // value preservation at random points
        for (int i = 0; i < 200; ++i) {
            EvalEnv env;
            env.vars["a"] = Matrix{{rng.uniform(-2, 2)}};
            env.vars["b"] = Matrix{{rng.uniform(-2, 2)}};
            env.vars["z"] = rng.matrix(2, 1);
            env.vars["torque"] = rng.matrix(2, 1);
            env.vars["friction"] = rng.matrix(2, 1);
            env.vars["dphi"] = rng.matrix(3, 2);
            env.vars["f"] = rng.matrix(3, 1);
            const Matrix v1 = eval(e, env);
            const Matrix v2 = eval(s1, env);
            CHECK(Matrix::max_abs_diff(v1, v2) < 1e-12 * std::max(1.0, v1.max_abs()));
        }
    }
}

namespace {

// random expression over scalars a, b and the 2-vector z
Expr random_expr(Rng& rng, int depth) {
    const int pick = static_cast<int>(rng.next_u64() % (depth <= 0 ? 3 : 10));
    switch (pick) {
        case 0: return var("a");
        case 1: return var("b");
        case 2: return cst(rng.uniform(-3, 3));
        case 3: return add(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 4: return sub(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 5: return mul(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 6: return neg(random_expr(rng, depth - 1));
        case 7: return sin_expr(random_expr(rng, depth - 1));
        case 8: return mul(cst(rng.uniform(-2, 2)), random_expr(rng, depth - 1));
        default: {
            // guaranteed-nonzero constant denominator
            double d = rng.uniform(0.5, 2.0);
            if (rng.next_u64() & 1) d = -d;
            return div(random_expr(rng, depth - 1), cst(d));
        }
    }
}

}  // namespace

TEST_CASE("simplify preserves value and is idempotent on random expressions") {
    Rng rng(4242);
    for (int trial = 0; trial < 300; ++trial) {
        const Expr e = random_expr(rng, 4);
        const Expr s1 = simplify(e);
        const Expr s2 = simplify(s1);
        CHECK(struct_eq(s1, s2));
        // printer and parser agree semantically on arbitrary trees
        ParserSymbols sym;
        sym.shapes.vars = {{"a", {1, 1}}, {"b", {1, 1}}};
        const Expr reparsed = parse_expression(to_string(e), sym);
        for (int i = 0; i < 20; ++i) {
            EvalEnv env;
            env.vars["a"] = Matrix{{rng.uniform(-2, 2)}};
            env.vars["b"] = Matrix{{rng.uniform(-2, 2)}};
            const double v1 = eval(e, env).scalar();
            const double v2 = eval(s1, env).scalar();
            CHECK(std::abs(v1 - v2) <= 1e-12 * std::max(1.0, std::abs(v1)));
            const double v3 = eval(reparsed, env).scalar();
            CHECK(std::abs(v1 - v3) <= 1e-12 * std::max(1.0, std::abs(v1)));
        }
    }
}

TEST_CASE("interval evaluation uses the square rule for self dot") {
    IntervalEnv env;
    IntervalMatrix z(2, 1);
    z.data[0] = Interval(-0.5, 0.5);
    z.data[1] = Interval(-0.5, 0.5);
    env.vars["z"] = z;
    ParserSymbols sym = car_symbols();
    const Expr e = parse_expression("z'*z", sym);
    const Interval v = eval_interval(e, env).scalar();
    CHECK(v.lo == 0.0);
    CHECK(v.hi == doctest::Approx(0.5));

    // quadratic form diagonal also uses squares: lower bound stays nonnegative
    const Expr q = parse_expression("xtilde'*P*xtilde", sym);
    IntervalMatrix xt(3, 1);
    for (auto& iv : xt.data) iv = Interval(-1.0, 1.0);
    env.vars["xtilde"] = xt;
    CHECK(eval_interval(q, env).scalar().lo == 0.0);
}

TEST_CASE("interval evaluation flags uninterpreted externals and zero division") {
    ParserSymbols sym = car_symbols();
    IntervalEnv env;
    IntervalMatrix x(3, 1), u(2, 1);
    for (auto& iv : x.data) iv = Interval(0.0, 1.0);
    for (auto& iv : u.data) iv = Interval(0.0, 1.0);
    env.vars["x"] = x;
    env.vars["u"] = u;
    CHECK_THROWS_AS(eval_interval(parse_expression("f_func(x, u)", sym), env),
                    UninterpretedFunction);

    IntervalMatrix a(1, 1);
    a.data[0] = Interval(-1.0, 1.0);
    env.vars["a"] = a;
    CHECK_THROWS_AS(eval_interval(parse_expression("1/a", sym), env), ZeroDivisionInterval);
}

TEST_CASE("predicate parsing and evaluation") {
    const ParserSymbols sym = car_symbols();
    const Predicate p = parse_predicate("z'*z <= 1 && a <= b", sym);
    CHECK(p.conjuncts.size() == 2);
    EvalEnv env;
    env.vars["z"] = Matrix::column({0.5, 0.5});
    env.vars["a"] = Matrix{{1.0}};
    env.vars["b"] = Matrix{{2.0}};
    CHECK(eval(p, env));
    env.vars["b"] = Matrix{{0.0}};
    CHECK_FALSE(eval(p, env));
    // >= is normalized to <=
    const Predicate q = parse_predicate("a >= b", sym);
    CHECK(to_string(q) == "b <= a");
}
