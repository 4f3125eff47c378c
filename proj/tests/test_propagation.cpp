#include <cmath>

#include "doctest.h"

#include "credo/codegen.hpp"
#include "credo/errors.hpp"
#include "credo/expr_parse.hpp"
#include "credo/linalg.hpp"
#include "credo/propagation.hpp"
#include "credo/rng.hpp"
#include "credo/simplify.hpp"

using namespace credo;

TEST_CASE("affine image: scaling") {
    // P = I2, L = 2I -> Q = 0.25 I
    const Matrix q = ellipsoid_affine_image(Matrix::identity(2), Matrix::identity(2) * 2.0);
    CHECK(Matrix::max_abs_diff(q, Matrix::identity(2) * 0.25) < 1e-12);
}

TEST_CASE("affine image: axis projection") {
    // P = diag(4, 1), L = [1 0] -> Q = [4], so |y| <= 0.5
    const Matrix q = ellipsoid_affine_image(Matrix::diag({4.0, 1.0}), Matrix{{1.0, 0.0}});
    CHECK(q.rows() == 1);
    CHECK(q(0, 0) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("affine image: rank-deficient wide maps are degenerate") {
    CHECK_THROWS_AS(ellipsoid_affine_image(Matrix::identity(3), Matrix(2, 3)),
                    SingularMatrixError);
}

TEST_CASE("affine image: boundary sampling soundness and tightness") {
    Rng rng(61);
    for (int inst = 0; inst < 100; ++inst) {
        const std::size_t n = 2 + inst % 2;          // 2 or 3
        const std::size_t mdim = 1 + (inst / 2) % n; // up to n (square) or tall below
        const Matrix g = rng.matrix(n, n);
        const Matrix p = g.transpose() * g + Matrix::identity(n) * 0.3;
        Matrix l;
        bool tall = inst % 5 == 4;
        if (tall) {
            l = rng.matrix(n + 1 + inst % 2, n);
        } else {
            l = rng.matrix(mdim, n);
        }
        const Matrix q = ellipsoid_affine_image(p, l);

        Matrix chol_p;
        REQUIRE(cholesky(p, chol_p));
        double max_seen = 0.0;
        for (int s = 0; s < 10000; ++s) {
            const Matrix x = sample_ellipsoid_boundary(rng, chol_p);
            const Matrix y = l * x;
            const double v = (y.transpose() * q * y).scalar();
            CHECK(v <= 1.0 + 1e-9);
            max_seen = std::max(max_seen, v);
        }
        // deterministic extremal candidate: x* maximizing (Lx)'Q(Lx) on the
        // boundary, from the generalized eigenproblem via P^-1 L'QL
        const Matrix h = solve_spd(p, l.transpose() * q * l);
        // power iteration on h (independent of the image construction route)
        Matrix v = rng.gaussian_column(n);
        for (int it = 0; it < 2000; ++it) {
            v = h * v;
            const double norm = v.frobenius();
            if (norm > 0) v = v * (1.0 / norm);
        }
        const double vp = (v.transpose() * p * v).scalar();
        const Matrix xstar = v * (1.0 / std::sqrt(vp));
        const Matrix ystar = l * xstar;
        const double vstar = (ystar.transpose() * q * ystar).scalar();
        CHECK(vstar <= 1.0 + 1e-9);
        max_seen = std::max(max_seen, vstar);
        CHECK(max_seen >= 1.0 - 1e-3);
    }
}

TEST_CASE("tall injective maps preserve the value on the image") {
    Rng rng(62);
    const Matrix p = Matrix::identity(2);
    const Matrix l = rng.matrix(5, 2);
    const Matrix q = ellipsoid_affine_image(p, l);
    for (int i = 0; i < 100; ++i) {
        const Matrix x = rng.gaussian_column(2);
        const Matrix y = l * x;
        CHECK((y.transpose() * q * y).scalar() ==
              doctest::Approx((x.transpose() * p * x).scalar()).epsilon(1e-9));
    }
}

// ---- forward propagation over a toy linear loop ------------------------------

namespace {

// hand-built one-statement linear loop: v = G e, plant e+ = A e + B v
AnnotatedProgram toy_linear_program(const Matrix& g, const Matrix& a, const Matrix& b,
                                    Model& m_out, Loop& loop_out) {
    Model m;
    m.name = "toy";
    Signal e{"e", a.rows(), 1, true, false, false, 0};
    Signal v{"v", g.rows(), 1, false, true, false, 0};
    m.signals = {e, v};
    Block blk;
    blk.name = "ctrl";
    blk.kind = BlockKind::Gain;
    blk.inputs = {"e"};
    blk.output = "v";
    blk.subsystem = "lin";
    blk.gain_value = g;
    m.blocks = {blk};
    AnnotationBlock plant;
    plant.name = "plant";
    plant.kind = AnnotationKind::LinearPlant;
    plant.subsystem = "lin";
    plant.plant_inputs = {"v"};
    plant.plant_outputs = {"e"};
    plant.a = a;
    plant.b = b;
    m.annotations = {plant};

    Loop loop;
    loop.subsystem = "lin";
    loop.controller_blocks = {0};
    loop.plant = 0;

    AnnotatedProgram prog = generate_program(m, {loop});
    m_out = m;
    loop_out = loop;
    return prog;
}

}  // namespace

TEST_CASE("forward propagation: scalar-factor closed loop gives Q2 = 4P") {
    // G = 0 (no feedback), A = 0.5 I: image of P under 0.5 I is 4P
    Model m;
    Loop loop;
    const Matrix g(2, 2);  // zero gain
    const Matrix a = Matrix::identity(2) * 0.5;
    const Matrix b = Matrix{{1.0, 0.0}, {0.0, 1.0}};
    AnnotatedProgram prog = toy_linear_program(g, a, b, m, loop);
    Rng rng(63);
    const Matrix gg = rng.matrix(2, 2);
    const Ellipsoid p(gg.transpose() * gg + Matrix::identity(2));

    const ForwardResult fwd = propagate_linear_forward(prog, m, loop, "loop1", p);
    CHECK(Matrix::max_abs_diff(fwd.q2, p.shape() * 4.0) < 1e-9);
    CHECK(fwd.steps.size() == 2);
    CHECK(fwd.steps[0].forward);
    CHECK(fwd.steps[1].plant_step);

    // Q1 restricted to the stacked image equals P: [I; G] with G = 0
    const Matrix l1 = Matrix::vstack(Matrix::identity(2), g);
    for (int i = 0; i < 50; ++i) {
        Rng r2(100 + i);
        const Matrix x = r2.gaussian_column(2);
        const Matrix s = l1 * x;
        CHECK((s.transpose() * fwd.q1 * s).scalar() ==
              doctest::Approx((x.transpose() * p.shape() * x).scalar()).epsilon(1e-9));
    }
}

TEST_CASE("forward propagation rejects non-affine statements") {
    Model m;
    Loop loop;
    AnnotatedProgram prog =
        toy_linear_program(Matrix(1, 1), Matrix{{0.5}}, Matrix{{1.0}}, m, loop);
    // sabotage the loop statement with a saturation
    prog.statements[1].expr = sat(var("e"), -1.0, 1.0);
    CHECK_THROWS_WITH_AS(
        propagate_linear_forward(prog, m, loop, "loop1", Ellipsoid(Matrix{{1.0}})),
        doctest::Contains("not affine"), ValidationError);
}

TEST_CASE("forward propagation: sampled soundness of both emitted steps") {
    Model m;
    Loop loop;
    Rng rng(64);
    const Matrix g = rng.matrix(1, 2, -0.4, 0.4);
    const Matrix a{{0.6, 0.1}, {-0.05, 0.7}};
    const Matrix b{{0.2}, {0.1}};
    AnnotatedProgram prog = toy_linear_program(g, a, b, m, loop);
    const Ellipsoid p(Matrix::diag({2.0, 3.0}));
    const ForwardResult fwd = propagate_linear_forward(prog, m, loop, "loop1", p);

    Matrix chol_p;
    REQUIRE(cholesky(p.shape(), chol_p));
    const Matrix a_cl = a + b * g;
    for (int i = 0; i < 2000; ++i) {
        const Matrix x = sample_ellipsoid_interior(rng, chol_p);
        const Matrix s = Matrix::vstack(x, g * x);
        CHECK((s.transpose() * fwd.q1 * s).scalar() <= 1.0 + 1e-9);
        const Matrix xn = a_cl * x;
        CHECK((xn.transpose() * fwd.q2 * xn).scalar() <= 1.0 + 1e-9);
    }
}

// ---- weakest preconditions -----------------------------------------------------

namespace {

ParserSymbols wp_symbols() {
    ParserSymbols sym;
    sym.shapes.vars = {{"z", {2, 1}}, {"t", {2, 1}}, {"a", {1, 1}}, {"b", {1, 1}},
                       {"c", {1, 1}}};
    return sym;
}

}  // namespace

TEST_CASE("wp of an assignment is substitution") {
    const ParserSymbols sym = wp_symbols();
    const Predicate post = parse_predicate("z'*z <= 1", sym);
    const Expr rhs = parse_expression("z + t", sym);
    const Predicate wp = wp_assign(post, "z", rhs);
    CHECK(to_string(wp) == "(z + t)'*(z + t) <= 1");
    // untouched variable: wp is the identity
    const Predicate same = wp_assign(post, "t", rhs);
    CHECK(struct_eq(same, post));
}

TEST_CASE("chained wp equals wp of the composed substitution") {
    const ParserSymbols sym = wp_symbols();
    Rng rng(65);
    const Predicate post = parse_predicate("a + b <= c", sym);
    const Expr e1 = parse_expression("a*2 - b", sym);   // b := ...
    const Expr e2 = parse_expression("a + 1", sym);     // a := ...
    // program: a := e2; b := e1  (backward: wp(b), then wp(a))
    const Predicate wp_b = wp_assign(post, "b", e1);
    const Predicate chained = wp_assign(wp_b, "a", e2);
    // composed: substitute b by e1[a := e2]? no -- evaluate both on random
    // points and compare against executing the two assignments
    for (int i = 0; i < 1000; ++i) {
        EvalEnv env;
        env.vars["a"] = Matrix{{rng.uniform(-3, 3)}};
        env.vars["b"] = Matrix{{rng.uniform(-3, 3)}};
        env.vars["c"] = Matrix{{rng.uniform(-3, 3)}};
        const bool pre = eval(chained, env);
        EvalEnv run = env;
        run.vars["a"] = eval(e2, run);
        run.vars["b"] = eval(e1, run);
        CHECK(pre == eval(post, run));
    }
}

TEST_CASE("wp over an empty range is the postcondition") {
    const ParserSymbols sym = wp_symbols();
    const Predicate post = parse_predicate("z'*z <= 1", sym);
    const Predicate wp = wp_over_range({}, 1, 0, post);
    CHECK(struct_eq(wp, post));
}

TEST_CASE("backward wp predicts post satisfaction exactly on random programs") {
    // random straight-line programs over scalars a, b, c
    Rng rng(66);
    const ParserSymbols sym = wp_symbols();
    const char* rhs_pool[] = {"a + b", "a - 2*b", "b*c", "a*a - c", "c + 1", "a/2 + b"};
    const char* vars_pool[] = {"a", "b", "c"};
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Statement> stmts;
        for (int k = 0; k < 5; ++k) {
            Statement s;
            s.kind = StatementKind::Assign;
            s.var = vars_pool[rng.next_u64() % 3];
            s.expr = parse_expression(rhs_pool[rng.next_u64() % 6], sym);
            stmts.push_back(std::move(s));
        }
        const Predicate post = parse_predicate("a + b <= c", sym);
        const Predicate wp = wp_over_range(stmts, 0, stmts.size() - 1, post);
        for (int i = 0; i < 100; ++i) {
            EvalEnv env;
            env.vars["a"] = Matrix{{rng.uniform(-2, 2)}};
            env.vars["b"] = Matrix{{rng.uniform(-2, 2)}};
            env.vars["c"] = Matrix{{rng.uniform(-2, 2)}};
            const bool pre_holds = eval(wp, env);
            EvalEnv run = env;
            for (const Statement& s : stmts) run.vars[s.var] = eval(s.expr, run);
            CHECK(pre_holds == eval(post, run));
        }
    }
}
