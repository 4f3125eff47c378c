#include "credo/verifier.hpp"

#include <algorithm>
#include <set>
#include <cmath>
#include <sstream>

#include "credo/errors.hpp"
#include "credo/linalg.hpp"
#include "credo/rng.hpp"
#include "credo/simplify.hpp"

namespace credo {

namespace {

constexpr double kContainmentTol = 1e-9;
constexpr double kCertifyMargin = 1e-7;
constexpr double kFalsifyTol = 1e-9;

// evaluates lhs - rhs; falls back to the (value-preserving) simplified form
// when the original references unbound externals or variables the point does
// not carry (simplification may have cancelled them away)
double comparison_gap(const Comparison& c, const EvalEnv& env) {
    try {
        return eval(c.lhs, env).scalar() - eval(c.rhs, env).scalar();
    } catch (const Error&) {
        return eval(simplify(c.lhs), env).scalar() - eval(simplify(c.rhs), env).scalar();
    }
}

}  // namespace

bool vc_hypotheses_hold(const VC& vc, const std::map<std::string, Matrix>& vars) {
    EvalEnv env;
    env.vars = vars;
    env.fns = vc.fns;
    for (const Predicate& h : vc.hypotheses) {
        for (const Comparison& c : h.conjuncts) {
            if (comparison_gap(c, env) > 1e-12) return false;
        }
    }
    return true;
}

double vc_violation(const VC& vc, const std::map<std::string, Matrix>& vars) {
    EvalEnv env;
    env.vars = vars;
    env.fns = vc.fns;
    double worst = -1e300;
    for (const Comparison& c : vc.conclusion.conjuncts) {
        worst = std::max(worst, comparison_gap(c, env));
    }
    return worst;
}

Verdict Verdict::verified(EffortStats stats) {
    Verdict v;
    v.status = VerdictStatus::Verified;
    v.stats = stats;
    return v;
}

Verdict Verdict::falsified(const VC& vc, std::map<std::string, Matrix> witness,
                           EffortStats stats) {
    if (!vc_hypotheses_hold(vc, witness)) {
        throw ValidationError("falsification witness does not satisfy the hypotheses");
    }
    const double violation = vc_violation(vc, witness);
    if (!(violation > kFalsifyTol)) {
        throw ValidationError("falsification witness does not violate the conclusion");
    }
    Verdict v;
    v.status = VerdictStatus::Falsified;
    v.witness = std::move(witness);
    v.witness_violation = violation;
    v.reason = "conclusion violated by " + format_double(violation);
    v.stats = stats;
    return v;
}

Verdict Verdict::unknown(std::string reason, EffortStats stats) {
    Verdict v;
    v.status = VerdictStatus::Unknown;
    v.reason = std::move(reason);
    v.stats = stats;
    return v;
}

std::string to_string(VerdictStatus s) {
    switch (s) {
        case VerdictStatus::Verified: return "VERIFIED";
        case VerdictStatus::Falsified: return "FALSIFIED";
        case VerdictStatus::Unknown: return "UNKNOWN";
    }
    return "";
}

Ellipsoid synthesize_linear_invariant(const Matrix& a, const Matrix& b, const Matrix& k,
                                      const std::vector<double>& initial_halfwidths) {
    const Matrix a_cl = a - b * k;
    const Ellipsoid raw =
        solve_discrete_lyapunov(a_cl, Matrix::identity(a.rows()) * 1e-2);
    return raw.scaled_to_contain_box(initial_halfwidths);
}

// ---- VC generation ---------------------------------------------------------------

namespace {

// axis-aligned box implied by a quadratic hypothesis over a single variable
std::optional<std::pair<std::string, std::vector<Interval>>> box_from_comparison(
    const Comparison& c, const AnnotatedProgram& prog) {
    if (c.rhs->kind != ExprKind::Const || !c.rhs->value.is_scalar()) return std::nullopt;
    const double level = c.rhs->value.scalar();
    if (level <= 0.0) return std::nullopt;

    const Expr& lhs = c.lhs;
    std::string v;
    Matrix shape;
    if (lhs->kind == ExprKind::Quad && lhs->args[0]->kind == ExprKind::Var) {
        v = lhs->args[0]->name;
        shape = lhs->value;
    } else if (lhs->kind == ExprKind::Dot && lhs->args[0]->kind == ExprKind::Var &&
               struct_eq(lhs->args[0], lhs->args[1])) {
        v = lhs->args[0]->name;
        const auto it = prog.var_shapes.find(v);
        if (it == prog.var_shapes.end()) return std::nullopt;
        shape = Matrix::identity(it->second.rows);
    } else {
        return std::nullopt;
    }
    try {
        const Ellipsoid e(shape * (1.0 / level));
        const auto hw = e.aabb_halfwidths();
        std::vector<Interval> box;
        for (double h : hw) box.emplace_back(-h, h);
        return std::make_pair(v, box);
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace

std::vector<VC> gen_vcs(const AnnotatedProgram& prog,
                        const std::vector<PropagationStep>& steps,
                        const std::vector<DomainFact>& facts) {
    (void)steps;
    std::vector<VC> out;

    for (const LoopSpan& span : prog.spans) {
        const Contract* inserted_require = nullptr;
        const Contract* inserted_ensure = nullptr;
        const Contract* strongest_post = nullptr;
        const Contract* wp_at_start = nullptr;
        for (const Contract& c : prog.contracts) {
            if (c.loop_id != span.id) continue;
            switch (c.role) {
                case ContractRole::InsertedRequire: inserted_require = &c; break;
                case ContractRole::InsertedEnsure: inserted_ensure = &c; break;
                case ContractRole::StrongestPost: strongest_post = &c; break;
                case ContractRole::BackwardWp:
                    if (c.before && c.anchor == span.first) wp_at_start = &c;
                    break;
                default: break;
            }
        }

        if (strongest_post) {
            if (!inserted_ensure) {
                throw ValidationError(span.id +
                                      ": strongest post-condition has no inserted ensure "
                                      "to imply");
            }
            VC vc;
            vc.id = span.id + "/post";
            vc.loop_id = span.id;
            vc.hypotheses = {strongest_post->pred};
            vc.conclusion = inserted_ensure->pred;
            vc.origin = "strongest post at statement " +
                        std::to_string(strongest_post->anchor) + " -> inserted ensure";
            out.push_back(std::move(vc));
        }
        if (wp_at_start) {
            if (!inserted_require) {
                throw ValidationError(span.id +
                                      ": backward wp has no inserted require to pair with");
            }
            VC vc;
            vc.id = span.id + "/wp";
            vc.loop_id = span.id;
            vc.hypotheses = {inserted_require->pred};
            vc.conclusion = wp_at_start->pred;
            vc.origin = "inserted require at statement " +
                        std::to_string(inserted_require->anchor) + " -> backward wp";
            out.push_back(std::move(vc));
        }
    }

    // attach domain boxes: quadratic hypotheses first, then physical facts
    for (VC& vc : out) {
        for (const Predicate& h : vc.hypotheses) {
            for (const Comparison& c : h.conjuncts) {
                if (auto box = box_from_comparison(c, prog)) {
                    vc.domain.vars[box->first] = box->second;
                    vc.domain.provenance[box->first] = "hypothesis invariant";
                }
            }
        }
        for (const DomainFact& f : facts) {
            if (!vc.domain.covers(f.var)) {
                vc.domain.vars[f.var] = f.box;
                vc.domain.provenance[f.var] = f.provenance;
            }
        }
    }
    return out;
}

// ---- ellipsoid containment --------------------------------------------------------

Verdict check_ellipsoid_containment(const Matrix& q_hyp, const Matrix& p_concl) {
    if (q_hyp.rows() != p_concl.rows() || q_hyp.cols() != p_concl.cols()) {
        throw DimensionError("containment check: " + q_hyp.describe() + " against " +
                             p_concl.describe());
    }
    if (!is_positive_definite(q_hyp) || !is_positive_definite(p_concl)) {
        throw ValidationError("containment check expects SPD shape matrices");
    }
    Matrix diff = q_hyp - p_concl;
    const EigenSym es = eigen_symmetric(diff);
    EffortStats stats;
    stats.boxes = 1;
    if (es.values.front() >= -kContainmentTol) {
        return Verdict::verified(stats);
    }
    // witness: min-eigenvector scaled onto the hypothesis boundary
    Matrix w(q_hyp.rows(), 1);
    for (std::size_t i = 0; i < q_hyp.rows(); ++i) w[i] = es.vectors(i, 0);
    const double qv = (w.transpose() * q_hyp * w).scalar();
    const Matrix x = w * (1.0 / std::sqrt(qv));

    Verdict v;
    v.status = VerdictStatus::Falsified;
    v.witness["x"] = x;
    v.witness_violation = (x.transpose() * p_concl * x).scalar() - 1.0;
    v.reason = "containment fails: min-eig(Q_hyp - P_concl) = " +
               format_double(es.values.front());
    v.stats = stats;
    if (!(v.witness_violation > kFalsifyTol)) {
        throw ValidationError("containment witness fails its own re-check");
    }
    return v;
}

// ---- nonlinear implication ---------------------------------------------------------

namespace {

struct FlatDomain {
    std::vector<std::string> var_of_comp;   // flattened component -> variable
    std::vector<std::size_t> index_of_comp; // component index within variable
    std::vector<Interval> box;
    std::map<std::string, std::size_t> rows;  // variable -> row count
};

IntervalEnv interval_env(const FlatDomain& d, const std::vector<Interval>& box) {
    IntervalEnv env;
    for (const auto& [v, r] : d.rows) {
        env.vars[v] = IntervalMatrix(r, 1);
    }
    for (std::size_t k = 0; k < box.size(); ++k) {
        env.vars[d.var_of_comp[k]].data[d.index_of_comp[k]] = box[k];
    }
    return env;
}

EvalEnv point_env(const FlatDomain& d, const std::vector<double>& point) {
    EvalEnv env;
    for (const auto& [v, r] : d.rows) {
        env.vars[v] = Matrix(r, 1);
    }
    for (std::size_t k = 0; k < point.size(); ++k) {
        env.vars[d.var_of_comp[k]][d.index_of_comp[k]] = point[k];
    }
    return env;
}

struct ScalarPair {
    Expr lhs;
    Expr rhs;
};

}  // namespace

Verdict check_nonlinear_implication(const VC& vc, const CheckBudget& budget) {
    EffortStats stats;

    // sup-form rewriting happens on simplified predicates
    std::vector<ScalarPair> hyps;
    for (const Predicate& h : vc.hypotheses) {
        for (const Comparison& c : h.conjuncts) {
            hyps.push_back({simplify(c.lhs), simplify(c.rhs)});
        }
    }
    std::vector<ScalarPair> concls;
    for (const Comparison& c : vc.conclusion.conjuncts) {
        concls.push_back({simplify(c.lhs), simplify(c.rhs)});
    }
    // U = (W_lhs - W_rhs) - (V_lhs - V_rhs) per hypothesis/conclusion pair
    std::vector<std::vector<Expr>> sup_forms(concls.size());
    for (std::size_t ci = 0; ci < concls.size(); ++ci) {
        for (const ScalarPair& h : hyps) {
            sup_forms[ci].push_back(simplify(
                sub(sub(concls[ci].lhs, concls[ci].rhs), sub(h.lhs, h.rhs))));
        }
    }

    // bounded-variable precheck on the simplified obligation
    std::set<std::string> vars;
    for (const ScalarPair& h : hyps) {
        collect_free_vars(h.lhs, vars);
        collect_free_vars(h.rhs, vars);
    }
    for (const ScalarPair& c : concls) {
        collect_free_vars(c.lhs, vars);
        collect_free_vars(c.rhs, vars);
    }
    FlatDomain dom;
    for (const std::string& v : vars) {
        auto it = vc.domain.vars.find(v);
        if (it == vc.domain.vars.end()) {
            return Verdict::unknown("unbounded variable '" + v + "' (no domain fact)", stats);
        }
        dom.rows[v] = it->second.size();
        for (std::size_t i = 0; i < it->second.size(); ++i) {
            dom.var_of_comp.push_back(v);
            dom.index_of_comp.push_back(i);
            dom.box.push_back(it->second[i]);
        }
    }

    // point checks run on the simplified pairs (externals may have cancelled)
    auto point_violation = [&](const std::vector<double>& pt,
                               std::map<std::string, Matrix>* witness_out) -> bool {
        EvalEnv env = point_env(dom, pt);
        env.fns = vc.fns;
        for (const ScalarPair& h : hyps) {
            if (eval(h.lhs, env).scalar() > eval(h.rhs, env).scalar() + 1e-12) return false;
        }
        double violation = -1e300;
        for (const ScalarPair& c : concls) {
            violation = std::max(violation,
                                 eval(c.lhs, env).scalar() - eval(c.rhs, env).scalar());
        }
        stats.max_violation = std::max(stats.max_violation, violation);
        if (violation > kFalsifyTol) {
            if (witness_out) *witness_out = env.vars;
            return true;
        }
        return false;
    };

    // ---- phase 1: seeded sampling of the hypothesis set -------------------------
    Rng rng(budget.seed);
    std::vector<double> pt(dom.box.size());
    for (std::size_t s = 0; s < budget.samples; ++s) {
        for (std::size_t k = 0; k < dom.box.size(); ++k) {
            pt[k] = rng.uniform(dom.box[k].lo, dom.box[k].hi);
        }
        ++stats.samples;
        std::map<std::string, Matrix> witness;
        try {
            if (point_violation(pt, &witness)) {
                return Verdict::falsified(vc, std::move(witness), stats);
            }
        } catch (const Error&) {
            // inadmissible sample (division by zero); skip
        }
    }

    // ---- phase 2: adaptive interval bisection ------------------------------------
    struct BoxTask {
        std::vector<Interval> box;
        int depth;
    };
    std::vector<BoxTask> stack{{dom.box, 0}};
    bool any_undecided = false;
    std::string worst_box;
    double worst_value = -1e300;
    auto describe_box = [](const std::vector<Interval>& box, bool zero_div) {
        std::ostringstream os;
        for (std::size_t k = 0; k < box.size(); ++k) {
            if (k) os << " x ";
            os << box[k].str();
        }
        if (zero_div) os << " (interval division by zero)";
        return os.str();
    };

    const bool full_split = dom.box.size() <= 3;

    while (!stack.empty()) {
        BoxTask task = std::move(stack.back());
        stack.pop_back();
        ++stats.boxes;

        bool decided = false;
        bool undecidable_here = false;  // interval division straddling zero
        double box_sup = -1e300;        // tightest certification gap seen
        try {
            const IntervalEnv env = interval_env(dom, task.box);
            // (1) hypothesis refuted on the whole box
            for (const ScalarPair& h : hyps) {
                const Interval lhs = eval_interval(h.lhs, env).scalar();
                const Interval rhs = eval_interval(h.rhs, env).scalar();
                if (lhs.lo - rhs.hi > 0.0) {
                    decided = true;
                    break;
                }
            }
            // (2) conclusion holds outright
            if (!decided) {
                bool all = true;
                for (const ScalarPair& c : concls) {
                    const Interval lhs = eval_interval(c.lhs, env).scalar();
                    const Interval rhs = eval_interval(c.rhs, env).scalar();
                    if (!(lhs.hi - rhs.lo <= kCertifyMargin)) {
                        all = false;
                        break;
                    }
                }
                decided = all;
            }
            // (3) sup over the hypothesis of W - V stays below the margin
            if (!decided) {
                bool all = true;
                for (std::size_t ci = 0; ci < concls.size() && all; ++ci) {
                    bool one = false;
                    double local = 1e300;
                    for (const Expr& u : sup_forms[ci]) {
                        const Interval iu = eval_interval(u, env).scalar();
                        local = std::min(local, iu.hi);
                        if (iu.hi <= kCertifyMargin) {
                            one = true;
                            break;
                        }
                    }
                    if (!one) {
                        all = false;
                        box_sup = std::max(box_sup, local);
                    }
                }
                decided = all;
            }
        } catch (const ZeroDivisionInterval&) {
            undecidable_here = true;
        } catch (const UninterpretedFunction& uf) {
            return Verdict::unknown(
                "uninterpreted external function '" + uf.name + "' in obligation", stats);
        }

        if (decided) continue;

        // midpoint falsification attempt
        std::vector<double> mid(task.box.size());
        for (std::size_t k = 0; k < task.box.size(); ++k) mid[k] = task.box[k].mid();
        std::map<std::string, Matrix> witness;
        try {
            if (point_violation(mid, &witness)) {
                return Verdict::falsified(vc, std::move(witness), stats);
            }
        } catch (const Error&) {
        }

        if (task.depth >= budget.depth || undecidable_here) {
            any_undecided = true;
            if (worst_box.empty() || undecidable_here) {
                std::ostringstream os;
                for (std::size_t k = 0; k < task.box.size(); ++k) {
                    if (k) os << " x ";
                    os << task.box[k].str();
                }
                if (undecidable_here) os << " (interval division by zero)";
                worst_box = os.str();
            }
            continue;
        }

        // split: every dimension for small arity, widest dimension otherwise
        if (full_split) {
            const std::size_t dims = task.box.size();
            const std::size_t children = std::size_t{1} << dims;
            for (std::size_t mask = 0; mask < children; ++mask) {
                BoxTask child;
                child.depth = task.depth + 1;
                child.box = task.box;
                for (std::size_t k = 0; k < dims; ++k) {
                    const double m = task.box[k].mid();
                    child.box[k] = (mask >> k) & 1 ? Interval(m, task.box[k].hi)
                                                   : Interval(task.box[k].lo, m);
                }
                stack.push_back(std::move(child));
            }
        } else {
            std::size_t widest = 0;
            for (std::size_t k = 1; k < task.box.size(); ++k) {
                if (task.box[k].width() > task.box[widest].width()) widest = k;
            }
            const double m = task.box[widest].mid();
            BoxTask lo = task, hi = task;
            lo.depth = hi.depth = task.depth + 1;
            lo.box[widest] = Interval(task.box[widest].lo, m);
            hi.box[widest] = Interval(m, task.box[widest].hi);
            stack.push_back(std::move(lo));
            stack.push_back(std::move(hi));
        }
    }

    if (any_undecided) {
        return Verdict::unknown("undecided box at depth limit: " + worst_box, stats);
    }
    return Verdict::verified(stats);
}

Verdict check_vc(const VC& vc, const CheckBudget& budget) {
    // ellipsoid-to-ellipsoid obligations go to the eigenvalue test
    if (vc.hypotheses.size() == 1 && vc.hypotheses[0].conjuncts.size() == 1 &&
        vc.conclusion.conjuncts.size() == 1) {
        const Comparison& h = vc.hypotheses[0].conjuncts[0];
        const Comparison& c = vc.conclusion.conjuncts[0];
        const bool quads = h.lhs->kind == ExprKind::Quad && c.lhs->kind == ExprKind::Quad &&
                           h.lhs->args[0]->kind == ExprKind::Var &&
                           c.lhs->args[0]->kind == ExprKind::Var &&
                           h.lhs->args[0]->name == c.lhs->args[0]->name &&
                           h.rhs->kind == ExprKind::Const && c.rhs->kind == ExprKind::Const &&
                           h.rhs->value.is_scalar() && c.rhs->value.is_scalar() &&
                           h.rhs->value.scalar() == 1.0 && c.rhs->value.scalar() == 1.0;
        if (quads) {
            return check_ellipsoid_containment(h.lhs->value, c.lhs->value);
        }
    }
    return check_nonlinear_implication(vc, budget);
}

// ---- bound extraction ---------------------------------------------------------------

ExtractedBounds extract_bounds(const Ellipsoid& x_invariant, const Matrix& x_center,
                               double z_amplitude, const std::vector<DomainFact>& facts,
                               const CarParams& params) {
    const DomainFact* slip = nullptr;
    for (const DomainFact& f : facts) {
        if (f.provenance == "slip_assumption" || f.var == "u") slip = &f;
    }
    if (!slip || slip->box.size() != 2) {
        throw ValidationError(
            "bound extraction needs the physical slip-range assumption (fact 'u', "
            "provenance slip_assumption): slips lie in (-1, s_max] only by knowledge "
            "of the car, not by the invariants alone");
    }

    ExtractedBounds out;
    const auto hw = x_invariant.aabb_halfwidths();
    for (std::size_t i = 0; i < hw.size(); ++i) {
        out.x.emplace_back(x_center[i] - hw[i], x_center[i] + hw[i]);
    }
    out.phi = phi_interval(out.x, {slip->box[0], slip->box[1]}, params);
    for (const Interval& iv : out.phi) {
        out.omega.emplace_back(iv.lo - z_amplitude, iv.hi + z_amplitude);
    }
    return out;
}

}  // namespace credo
