#include "credo/program.hpp"

#include <set>

#include "credo/errors.hpp"

namespace credo {

ShapeEnv AnnotatedProgram::shape_env() const {
    ShapeEnv env;
    env.vars = var_shapes;
    for (const ExternalDecl& e : externals) {
        env.fn_arity[e.name] = e.arity;
        env.fn_results[e.name] = {e.result_rows, e.result_cols};
    }
    return env;
}

const LoopSpan* AnnotatedProgram::find_span(const std::string& id) const {
    for (const LoopSpan& s : spans) {
        if (s.id == id) return &s;
    }
    return nullptr;
}

std::vector<std::string> def_before_use_violations(const AnnotatedProgram& prog) {
    std::set<std::string> inputs;
    for (const Statement& s : prog.statements) {
        if (s.kind == StatementKind::Input) inputs.insert(s.var);
    }
    std::vector<std::string> offenders;
    for (const Contract& c : prog.contracts) {
        std::set<std::string> defined = inputs;
        const std::size_t limit = c.before ? c.anchor : c.anchor + 1;
        for (std::size_t i = 0; i < limit && i < prog.statements.size(); ++i) {
            if (prog.statements[i].kind == StatementKind::Assign) {
                defined.insert(prog.statements[i].var);
            }
        }
        std::set<std::string> used;
        if (c.kind == ContractKind::Assume && c.update_expr) {
            used.insert(c.update_var);
            collect_free_vars(c.update_expr, used);
        } else {
            used = free_vars(c.pred);
        }
        for (const std::string& v : used) {
            if (!defined.count(v)) offenders.push_back(v + " (contract at statement " +
                                                       std::to_string(c.anchor) + ")");
        }
    }
    return offenders;
}

namespace {

bool statement_equal(const Statement& a, const Statement& b) {
    if (a.kind != b.kind || a.var != b.var) return false;
    if (static_cast<bool>(a.expr) != static_cast<bool>(b.expr)) return false;
    return !a.expr || struct_eq(a.expr, b.expr);
}

bool contract_equal(const Contract& a, const Contract& b) {
    if (a.kind != b.kind || a.role != b.role || a.anchor != b.anchor ||
        a.before != b.before || a.loop_id != b.loop_id || a.update_var != b.update_var) {
        return false;
    }
    if (!struct_eq(a.pred, b.pred)) return false;
    if (static_cast<bool>(a.update_expr) != static_cast<bool>(b.update_expr)) return false;
    return !a.update_expr || struct_eq(a.update_expr, b.update_expr);
}

// rewrites variable names to v0, v1, ... in first-occurrence order; with
// strip_consts, constant payloads reduce to their shape (skeleton compare)
struct Renamer {
    bool strip_consts = false;
    std::map<std::string, std::string> names;

    std::string rename(const std::string& v) {
        auto it = names.find(v);
        if (it != names.end()) return it->second;
        const std::string fresh = "v" + std::to_string(names.size());
        names[v] = fresh;
        return fresh;
    }

    Expr rewrite(const Expr& e) {
        if (!e) return e;
        if (e->kind == ExprKind::Var) return var(rename(e->name));
        auto n = std::make_shared<ExprNode>(*e);
        if (strip_consts &&
            (e->kind == ExprKind::Const || e->kind == ExprKind::Quad)) {
            n->value = Matrix(e->value.rows(), e->value.cols());
            n->name.clear();
        }
        for (Expr& a : n->args) a = rewrite(a);
        return n;
    }

    Predicate rewrite(const Predicate& p) {
        Predicate out;
        for (const Comparison& c : p.conjuncts) {
            out.conjuncts.push_back({rewrite(c.lhs), rewrite(c.rhs)});
        }
        return out;
    }
};

AnnotatedProgram canonicalized(const AnnotatedProgram& prog, bool strip_consts = false) {
    AnnotatedProgram out = prog;
    Renamer r;
    r.strip_consts = strip_consts;
    for (Statement& s : out.statements) {
        if (!s.var.empty()) s.var = r.rename(s.var);
        if (s.expr) s.expr = r.rewrite(s.expr);
        s.source.clear();
    }
    for (Contract& c : out.contracts) {
        c.pred = r.rewrite(c.pred);
        if (!c.update_var.empty()) c.update_var = r.rename(c.update_var);
        if (c.update_expr) c.update_expr = r.rewrite(c.update_expr);
        c.loop_id.clear();
    }
    for (LoopSpan& s : out.spans) s.id.clear();
    return out;
}

}  // namespace

bool program_equal(const AnnotatedProgram& a, const AnnotatedProgram& b) {
    if (a.statements.size() != b.statements.size() ||
        a.contracts.size() != b.contracts.size() || a.spans.size() != b.spans.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.statements.size(); ++i) {
        if (!statement_equal(a.statements[i], b.statements[i])) return false;
    }
    for (std::size_t i = 0; i < a.contracts.size(); ++i) {
        if (!contract_equal(a.contracts[i], b.contracts[i])) return false;
    }
    for (std::size_t i = 0; i < a.spans.size(); ++i) {
        if (a.spans[i].id != b.spans[i].id || a.spans[i].first != b.spans[i].first ||
            a.spans[i].last != b.spans[i].last) {
            return false;
        }
    }
    return true;
}

bool program_equal_modulo_renaming(const AnnotatedProgram& a, const AnnotatedProgram& b) {
    return program_equal(canonicalized(a), canonicalized(b));
}

bool program_skeleton_equal(const AnnotatedProgram& a, const AnnotatedProgram& b) {
    return program_equal(canonicalized(a, true), canonicalized(b, true));
}

}  // namespace credo
