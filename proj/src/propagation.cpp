#include "credo/propagation.hpp"

#include <map>

#include "credo/errors.hpp"
#include "credo/linalg.hpp"

namespace credo {

Matrix ellipsoid_affine_image(const Matrix& p, const Matrix& l) {
    if (l.cols() != p.rows() || p.rows() != p.cols()) {
        throw DimensionError("affine image: L " + l.describe() + " against P " +
                             p.describe());
    }
    if (l.rows() <= l.cols()) {
        // exact image; needs full row rank
        const Matrix pinv_p = solve_spd(p, Matrix::identity(p.rows()));
        const Matrix gram = l * pinv_p * l.transpose();
        Matrix chol;
        if (!cholesky(gram, chol, 1e-12)) {
            throw SingularMatrixError(
                "degenerate image: map is not full row rank, the image ellipsoid "
                "collapses");
        }
        return solve_spd(gram, Matrix::identity(gram.rows()));
    }
    const Matrix li = pinv(l);  // throws on rank deficiency
    return li.transpose() * p * li;
}

namespace {

// linear coefficient of `e` as a map from the loop state; throws on anything
// non-linear (constants included: loop code must be homogeneous in the state)
Matrix linear_coefficient(const Expr& e, const std::map<std::string, Matrix>& maps,
                          std::size_t state_dim) {
    switch (e->kind) {
        case ExprKind::Var: {
            auto it = maps.find(e->name);
            if (it == maps.end()) {
                throw ValidationError("variable '" + e->name +
                                      "' is not linear in the loop state");
            }
            return it->second;
        }
        case ExprKind::Neg:
            return -linear_coefficient(e->args[0], maps, state_dim);
        case ExprKind::Add:
            return linear_coefficient(e->args[0], maps, state_dim) +
                   linear_coefficient(e->args[1], maps, state_dim);
        case ExprKind::Sub:
            return linear_coefficient(e->args[0], maps, state_dim) -
                   linear_coefficient(e->args[1], maps, state_dim);
        case ExprKind::Mul: {
            const Expr& lhs = e->args[0];
            const Expr& rhs = e->args[1];
            if (lhs->kind == ExprKind::Const) {
                const Matrix sub = linear_coefficient(rhs, maps, state_dim);
                if (lhs->value.is_scalar()) return sub * lhs->value.scalar();
                return lhs->value * sub;
            }
            if (rhs->kind == ExprKind::Const && rhs->value.is_scalar()) {
                return linear_coefficient(lhs, maps, state_dim) * rhs->value.scalar();
            }
            throw ValidationError("non-linear product");
        }
        case ExprKind::Div: {
            const Expr& rhs = e->args[1];
            if (rhs->kind == ExprKind::Const && rhs->value.is_scalar() &&
                rhs->value.scalar() != 0.0) {
                return linear_coefficient(e->args[0], maps, state_dim) *
                       (1.0 / rhs->value.scalar());
            }
            throw ValidationError("non-linear division");
        }
        default:
            throw ValidationError("non-linear operator");
    }
}

std::string fresh_const_name(const AnnotatedProgram& prog, const std::string& base) {
    if (!prog.constants.count(base)) return base;
    int k = 2;
    while (prog.constants.count(base + "_" + std::to_string(k))) ++k;
    return base + "_" + std::to_string(k);
}

}  // namespace

ForwardResult propagate_linear_forward(const AnnotatedProgram& prog, const Model& m,
                                       const Loop& loop, const std::string& loop_id,
                                       const Ellipsoid& p, const std::string& p_name) {
    const LoopSpan* span = prog.find_span(loop_id);
    if (!span) throw ValidationError("no span for " + loop_id);
    const AnnotationBlock& plant = m.annotations.at(loop.plant);
    if (plant.kind != AnnotationKind::LinearPlant || !plant.a || !plant.b) {
        throw ValidationError(loop_id + ": forward propagation needs a resolved linear plant");
    }
    if (plant.plant_outputs.size() != 1 || plant.plant_inputs.size() != 1) {
        throw ValidationError(loop_id + ": expected single state and input signals");
    }
    const std::string state = plant.plant_outputs[0];
    const std::string ctrl_out = plant.plant_inputs[0];
    const std::size_t n = plant.a->rows();
    if (p.dim() != n) {
        throw DimensionError(loop_id + ": invariant dimension " + std::to_string(p.dim()) +
                             " against state dimension " + std::to_string(n));
    }

    // walk the span, building linear maps state -> var
    std::map<std::string, Matrix> maps;
    maps[state] = Matrix::identity(n);
    std::size_t ctrl_stmt = prog.statements.size();
    for (std::size_t k = span->first; k <= span->last; ++k) {
        const Statement& st = prog.statements[k];
        if (st.kind != StatementKind::Assign) continue;
        Matrix coeff;
        try {
            coeff = linear_coefficient(st.expr, maps, n);
        } catch (const ValidationError& err) {
            throw ValidationError(loop_id + ": statement '" + st.var + " = " +
                                  to_string(st.expr) + "' is not affine in the loop state (" +
                                  err.what() + ")");
        }
        maps[st.var] = coeff;
        if (st.var == ctrl_out) ctrl_stmt = k;
    }
    auto g = maps.find(ctrl_out);
    if (g == maps.end() || ctrl_stmt >= prog.statements.size()) {
        throw ValidationError(loop_id + ": controller output '" + ctrl_out +
                              "' is not assigned inside the span");
    }

    ForwardResult out;
    out.prog = prog;

    const Matrix l1 = Matrix::vstack(Matrix::identity(n), g->second);
    out.q1 = ellipsoid_affine_image(p.shape(), l1);
    const Matrix a_cl = *plant.a + *plant.b * g->second;
    out.q2 = ellipsoid_affine_image(p.shape(), a_cl);

    const std::string q1_name = fresh_const_name(out.prog, "Q1");
    out.prog.constants[q1_name] = out.q1;
    const std::string q2_name = fresh_const_name(out.prog, "Q2");
    out.prog.constants[q2_name] = out.q2;

    const Predicate p_pred = pred_le(quad(p.shape(), var(state), p_name), cst(1.0));
    const Predicate q1_pred =
        pred_le(quad(out.q1, vcat({var(state), var(ctrl_out)}), q1_name), cst(1.0));
    const Predicate q2_pred = pred_le(quad(out.q2, var(state), q2_name), cst(1.0));

    Contract step_ensure;
    step_ensure.kind = ContractKind::Ensure;
    step_ensure.role = ContractRole::StepEnsure;
    step_ensure.pred = q1_pred;
    step_ensure.anchor = ctrl_stmt;
    step_ensure.before = true;
    step_ensure.loop_id = loop_id;
    out.prog.contracts.push_back(step_ensure);

    Contract plant_pre = step_ensure;
    plant_pre.kind = ContractKind::Require;
    plant_pre.role = ContractRole::PlantPre;
    plant_pre.anchor = span->last;
    plant_pre.before = false;
    out.prog.contracts.push_back(plant_pre);

    Contract strongest = plant_pre;
    strongest.kind = ContractKind::Ensure;
    strongest.role = ContractRole::StrongestPost;
    strongest.pred = q2_pred;
    out.prog.contracts.push_back(strongest);

    PropagationStep s1;
    s1.loop_id = loop_id;
    s1.statement = ctrl_stmt;
    s1.forward = true;
    s1.in_pred = p_pred;
    s1.out_pred = q1_pred;
    out.steps.push_back(s1);

    PropagationStep s2;
    s2.loop_id = loop_id;
    s2.statement = span->last;
    s2.plant_step = true;
    s2.forward = true;
    s2.in_pred = q1_pred;
    s2.out_pred = q2_pred;
    out.steps.push_back(s2);

    return out;
}

Predicate wp_assign(const Predicate& post, const std::string& v, const Expr& e) {
    return substitute(post, v, e);
}

Predicate wp_over_range(const std::vector<Statement>& statements, std::size_t first,
                        std::size_t last, const Predicate& post) {
    Predicate cur = post;
    if (first > last) return cur;
    for (std::size_t k = last + 1; k-- > first;) {
        const Statement& st = statements.at(k);
        if (st.kind == StatementKind::Assign) {
            cur = wp_assign(cur, st.var, st.expr);
        } else if (st.kind == StatementKind::Input) {
            break;  // inputs are environment-given; the fold terminates here
        }
        if (k == first) break;
    }
    return cur;
}

BackwardResult propagate_backward(const AnnotatedProgram& prog, const Loop& loop,
                                  const std::string& loop_id, const Predicate& post) {
    (void)loop;
    const LoopSpan* span = prog.find_span(loop_id);
    if (!span) throw ValidationError("no span for " + loop_id);

    BackwardResult out;
    out.prog = prog;

    // the placed plant update acts as the first (virtual) assignment
    const Contract* update = nullptr;
    for (const Contract& c : prog.contracts) {
        if (c.role == ContractRole::PlantUpdate && c.loop_id == loop_id) update = &c;
    }
    if (!update) {
        throw ValidationError(loop_id + ": no plant update placed before backward propagation");
    }

    Predicate cur = wp_assign(post, update->update_var, update->update_expr);
    PropagationStep plant_step;
    plant_step.loop_id = loop_id;
    plant_step.statement = span->last;
    plant_step.plant_step = true;
    plant_step.forward = false;
    plant_step.in_pred = post;
    plant_step.out_pred = cur;
    out.steps.push_back(plant_step);

    Contract pre_plant;
    pre_plant.kind = ContractKind::Require;
    pre_plant.role = ContractRole::BackwardWp;
    pre_plant.pred = cur;
    pre_plant.anchor = span->last;
    pre_plant.before = false;
    pre_plant.loop_id = loop_id;
    out.prog.contracts.push_back(pre_plant);

    for (std::size_t k = span->last + 1; k-- > span->first;) {
        const Statement& st = prog.statements.at(k);
        if (st.kind == StatementKind::Assign) {
            Predicate next = wp_assign(cur, st.var, st.expr);
            PropagationStep step;
            step.loop_id = loop_id;
            step.statement = k;
            step.forward = false;
            step.in_pred = cur;
            step.out_pred = next;
            out.steps.push_back(std::move(step));
            cur = std::move(next);
        } else if (st.kind == StatementKind::Input) {
            break;
        }
        if (k == span->first) break;
    }

    Contract at_start = pre_plant;
    at_start.pred = cur;
    at_start.anchor = span->first;
    at_start.before = true;
    out.prog.contracts.push_back(at_start);

    out.wp_at_span_start = cur;
    return out;
}

}  // namespace credo
