#include "credo/simplify.hpp"

#include <cmath>
#include <vector>

#include "credo/errors.hpp"

namespace credo {

namespace {

bool is_const(const Expr& e) { return e->kind == ExprKind::Const; }

bool is_scalar_const(const Expr& e, double& out) {
    if (is_const(e) && e->value.is_scalar()) {
        out = e->value.scalar();
        return true;
    }
    return false;
}

struct Term {
    double coeff = 1.0;
    Expr core;  // empty for a pure numeric contribution folded into `constant`
};

Expr zero_like(const Expr& reference, const ShapeEnv* shapes) {
    if (shapes) {
        try {
            const Shape s = shape_of(reference, *shapes);
            return cst(Matrix(s.rows, s.cols));
        } catch (const DimensionError&) {
            // fall through to scalar zero
        }
    }
    return cst(0.0);
}

class Simplifier {
public:
    explicit Simplifier(const ShapeEnv* shapes) : shapes_(shapes) {}

    Expr run(const Expr& e) {
        switch (e->kind) {
            case ExprKind::Var:
            case ExprKind::Const:
                return e;
            case ExprKind::Add:
            case ExprKind::Sub:
            case ExprKind::Neg:
                return simplify_sum(e);
            case ExprKind::Mul:
            case ExprKind::Div:
                return simplify_product(e);
            case ExprKind::Transpose: {
                Expr a = run(e->args[0]);
                if (a->kind == ExprKind::Transpose) return a->args[0];
                if (is_const(a) && a->name.empty()) return cst(a->value.transpose());
                return rebuild(e, {a});
            }
            case ExprKind::Vcat: {
                std::vector<Expr> parts;
                bool all_unnamed_const = true;
                for (const Expr& p : e->args) {
                    parts.push_back(run(p));
                    all_unnamed_const =
                        all_unnamed_const && is_const(parts.back()) && parts.back()->name.empty();
                }
                if (all_unnamed_const) {
                    Matrix m = parts.front()->value;
                    for (std::size_t i = 1; i < parts.size(); ++i) {
                        m = Matrix::vstack(m, parts[i]->value);
                    }
                    return cst(std::move(m));
                }
                return rebuild(e, std::move(parts));
            }
            case ExprKind::Dot: {
                Expr a = run(e->args[0]);
                Expr b = run(e->args[1]);
                if (is_const(a) && is_const(b) && a->name.empty() && b->name.empty()) {
                    return cst((a->value.transpose() * b->value).scalar());
                }
                return rebuild(e, {a, b});
            }
            case ExprKind::Quad: {
                Expr a = run(e->args[0]);
                if (is_const(a) && a->name.empty()) {
                    return cst((a->value.transpose() * e->value * a->value).scalar());
                }
                return rebuild(e, {a});
            }
            case ExprKind::Sat:
            case ExprKind::Sin:
            case ExprKind::Cos:
                return rebuild(e, {run(e->args[0])});
            case ExprKind::Apply: {
                std::vector<Expr> args;
                for (const Expr& a : e->args) args.push_back(run(a));
                return rebuild(e, std::move(args));
            }
        }
        throw Error("unreachable expression kind");
    }

private:
    Expr rebuild(const Expr& proto, std::vector<Expr> args) {
        bool same = args.size() == proto->args.size();
        for (std::size_t i = 0; same && i < args.size(); ++i) {
            same = args[i].get() == proto->args[i].get();
        }
        if (same) return proto;
        auto n = std::make_shared<ExprNode>(*proto);
        n->args = std::move(args);
        return n;
    }

    // ---- sums -----------------------------------------------------------------

    void flatten_sum(const Expr& e, double sign, std::vector<Term>& terms) {
        switch (e->kind) {
            case ExprKind::Add:
                flatten_sum(e->args[0], sign, terms);
                flatten_sum(e->args[1], sign, terms);
                return;
            case ExprKind::Sub:
                flatten_sum(e->args[0], sign, terms);
                flatten_sum(e->args[1], -sign, terms);
                return;
            case ExprKind::Neg:
                flatten_sum(e->args[0], -sign, terms);
                return;
            default: {
                Expr s = run(e);
                if (s->kind == ExprKind::Add || s->kind == ExprKind::Sub ||
                    s->kind == ExprKind::Neg) {
                    flatten_sum(s, sign, terms);
                    return;
                }
                double coeff = sign;
                Expr core = strip_scalar_coeff(s, coeff);
                terms.push_back({coeff, std::move(core)});
            }
        }
    }

    // Peels leading scalar-constant factors off a product.
    Expr strip_scalar_coeff(const Expr& e, double& coeff) {
        if (e->kind == ExprKind::Mul) {
            double c = 0.0;
            if (is_scalar_const(e->args[0], c)) {
                coeff *= c;
                return strip_scalar_coeff(e->args[1], coeff);
            }
            if (is_scalar_const(e->args[1], c)) {
                coeff *= c;
                return strip_scalar_coeff(e->args[0], coeff);
            }
        }
        return e;
    }

    Expr simplify_sum(const Expr& e) {
        std::vector<Term> terms;
        flatten_sum(e, 1.0, terms);

        // merge structurally equal cores; fold numeric constants together
        std::vector<Term> merged;
        double constant = 0.0;
        Matrix const_matrix;  // nonscalar constant accumulator
        bool have_matrix_const = false;
        for (Term& t : terms) {
            double c = 0.0;
            if (is_scalar_const(t.core, c) && t.core->name.empty()) {
                constant += t.coeff * c;
                continue;
            }
            if (is_const(t.core) && t.core->name.empty() && !t.core->value.is_scalar()) {
                if (!have_matrix_const) {
                    const_matrix = t.core->value * t.coeff;
                    have_matrix_const = true;
                } else {
                    const_matrix += t.core->value * t.coeff;
                }
                continue;
            }
            bool found = false;
            for (Term& m : merged) {
                if (struct_eq(m.core, t.core)) {
                    m.coeff += t.coeff;
                    found = true;
                    break;
                }
            }
            if (!found) merged.push_back(std::move(t));
        }

        std::vector<Term> kept;
        for (Term& m : merged) {
            if (m.coeff != 0.0) kept.push_back(std::move(m));
        }
        if (have_matrix_const && const_matrix.max_abs() != 0.0) {
            kept.push_back({1.0, cst(const_matrix)});
        }
        if (constant != 0.0) {
            kept.push_back({1.0, cst(constant)});
        }
        if (kept.empty()) return zero_like(e, shapes_);

        Expr out;
        for (const Term& t : kept) {
            if (!out) {
                if (t.coeff == 1.0) {
                    out = t.core;
                } else if (t.coeff == -1.0) {
                    out = neg(t.core);
                } else if (t.coeff > 0.0) {
                    out = mul(cst(t.coeff), t.core);
                } else {
                    out = neg(mul(cst(-t.coeff), t.core));
                }
            } else if (t.coeff > 0.0) {
                out = add(out, t.coeff == 1.0 ? t.core : mul(cst(t.coeff), t.core));
            } else {
                out = sub(out, t.coeff == -1.0 ? t.core : mul(cst(-t.coeff), t.core));
            }
        }
        return out;
    }

    // ---- products --------------------------------------------------------------

    Expr simplify_product(const Expr& e) {
        if (e->kind == ExprKind::Div) {
            Expr num = run(e->args[0]);
            Expr den = run(e->args[1]);
            double d = 0.0;
            if (is_scalar_const(den, d) && d != 0.0) {
                double n = 0.0;
                if (is_scalar_const(num, n)) return cst(n / d);
                return run(mul(cst(1.0 / d), num));
            }
            return rebuild(e, {num, den});
        }

        // flatten Mul chain keeping non-scalar factor order
        std::vector<Expr> factors;
        double coeff = 1.0;
        flatten_product(e, factors, coeff);
        if (coeff == 0.0) return zero_like(e, shapes_);
        if (factors.empty()) return cst(coeff);

        // fold adjacent unnamed constant matrix factors
        std::vector<Expr> folded;
        for (Expr& f : factors) {
            if (!folded.empty() && is_const(folded.back()) && folded.back()->name.empty() &&
                is_const(f) && f->name.empty() &&
                folded.back()->value.cols() == f->value.rows()) {
                folded.back() = cst(folded.back()->value * f->value);
            } else {
                folded.push_back(std::move(f));
            }
        }

        Expr out = folded.front();
        for (std::size_t i = 1; i < folded.size(); ++i) out = mul(out, folded[i]);
        if (coeff != 1.0) {
            double c = 0.0;
            if (is_scalar_const(out, c)) return cst(coeff * c);
            out = mul(cst(coeff), out);
        }
        return out;
    }

    void flatten_product(const Expr& e, std::vector<Expr>& factors, double& coeff) {
        if (e->kind == ExprKind::Mul) {
            flatten_product(e->args[0], factors, coeff);
            flatten_product(e->args[1], factors, coeff);
            return;
        }
        Expr s = run(e);
        if (s->kind == ExprKind::Mul) {
            flatten_product(s->args[0], factors, coeff);
            flatten_product(s->args[1], factors, coeff);
            return;
        }
        double c = 0.0;
        if (is_scalar_const(s, c)) {
            coeff *= c;
            return;
        }
        if (s->kind == ExprKind::Neg) {
            coeff = -coeff;
            flatten_product(s->args[0], factors, coeff);
            return;
        }
        factors.push_back(std::move(s));
    }

    const ShapeEnv* shapes_;
};

}  // namespace

Expr simplify(const Expr& e, const ShapeEnv* shapes) {
    return Simplifier(shapes).run(e);
}

Predicate simplify(const Predicate& p, const ShapeEnv* shapes) {
    Predicate out;
    Simplifier s(shapes);
    for (const Comparison& c : p.conjuncts) {
        out.conjuncts.push_back({s.run(c.lhs), s.run(c.rhs)});
    }
    return out;
}

}  // namespace credo
