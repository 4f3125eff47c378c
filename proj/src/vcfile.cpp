#include "credo/vcfile.hpp"

#include <map>
#include <sstream>

#include "credo/errors.hpp"
#include "credo/expr_parse.hpp"

namespace credo {

namespace {

const char* role_word(ContractRole r) {
    switch (r) {
        case ContractRole::InsertedRequire: return "inserted_require";
        case ContractRole::InsertedEnsure: return "inserted_ensure";
        case ContractRole::StepEnsure: return "step_ensure";
        case ContractRole::PlantPre: return "plant_pre";
        case ContractRole::StrongestPost: return "strongest_post";
        case ContractRole::PlantUpdate: return "plant_update";
        case ContractRole::BackwardWp: return "backward_wp";
        case ContractRole::Assumption: return "assumption";
    }
    return "";
}

ContractRole role_from(const std::string& w) {
    if (w == "inserted_require") return ContractRole::InsertedRequire;
    if (w == "inserted_ensure") return ContractRole::InsertedEnsure;
    if (w == "step_ensure") return ContractRole::StepEnsure;
    if (w == "plant_pre") return ContractRole::PlantPre;
    if (w == "strongest_post") return ContractRole::StrongestPost;
    if (w == "plant_update") return ContractRole::PlantUpdate;
    if (w == "backward_wp") return ContractRole::BackwardWp;
    if (w == "assumption") return ContractRole::Assumption;
    throw ParseError("unknown contract role '" + w + "'");
}

void write_matrix(std::ostringstream& os, const Matrix& m) {
    os << to_string(cst(m));
}

}  // namespace

std::string write_vc_text(const VcFile& file) {
    const AnnotatedProgram& prog = file.prog;
    std::ostringstream os;
    os << "vcfile 1\n";
    os << "program " << (prog.model_name.empty() ? "unnamed" : prog.model_name) << "\n";

    for (const auto& [name, value] : prog.constants) {
        os << "const " << name << " = ";
        write_matrix(os, value);
        os << "\n";
    }
    for (const auto& [name, shape] : prog.var_shapes) {
        os << "var " << name << " " << shape.rows << " " << shape.cols << "\n";
    }
    for (const ExternalDecl& e : prog.externals) {
        os << "external " << e.name << " " << e.arity << " " << e.result_rows << " "
           << e.result_cols << "\n";
    }
    for (const Statement& s : prog.statements) {
        switch (s.kind) {
            case StatementKind::Input:
                os << "stmt input " << s.var << "\n";
                break;
            case StatementKind::Assign:
                os << "stmt assign " << s.var << " = " << to_string(s.expr) << "\n";
                break;
            case StatementKind::Output:
                os << "stmt output " << to_string(s.expr) << "\n";
                break;
        }
    }
    for (const LoopSpan& sp : prog.spans) {
        os << "span " << sp.id << " " << sp.first << " " << sp.last << "\n";
    }
    for (const Contract& c : prog.contracts) {
        os << "contract " << (c.loop_id.empty() ? "-" : c.loop_id) << " ";
        switch (c.kind) {
            case ContractKind::Require: os << "require "; break;
            case ContractKind::Assume: os << "assume "; break;
            case ContractKind::Ensure: os << "ensure "; break;
        }
        os << role_word(c.role) << " " << (c.before ? "before" : "after") << " " << c.anchor
           << " : ";
        if (c.kind == ContractKind::Assume && c.update_expr) {
            os << c.update_var << " = " << to_string(c.update_expr);
        } else {
            os << to_string(c.pred);
        }
        os << "\n";
    }
    for (const PropagationStep& s : file.steps) {
        os << "step " << s.loop_id << " " << (s.forward ? "forward" : "backward") << " "
           << (s.plant_step ? "plant" : "stmt") << " " << s.statement << " : "
           << to_string(s.in_pred) << " -> " << to_string(s.out_pred) << "\n";
    }
    for (const DomainFact& f : file.facts) {
        os << "fact " << f.var;
        for (const Interval& iv : f.box) {
            os << " [" << format_double(iv.lo) << ", " << format_double(iv.hi) << "]";
        }
        os << " : " << (f.provenance.empty() ? "unspecified" : f.provenance) << "\n";
    }
    os << "end\n";
    return os.str();
}

VcFile parse_vc(const std::string& text) {
    VcFile out;
    Lexer lex(text);
    lex.expect("vcfile", "at start of vc file");
    lex.expect_number("as vc format version");
    lex.expect("program", "after header");
    out.prog.model_name = lex.expect_ident("as program name").text;

    ParserSymbols sym;  // grows as declarations are read

    auto read_matrix = [&]() -> Matrix {
        ParserSymbols none;
        const Expr e = parse_expression(lex, none);
        if (e->kind == ExprKind::Const) return e->value;
        if (e->kind == ExprKind::Neg && e->args[0]->kind == ExprKind::Const) {
            return -e->args[0]->value;
        }
        lex.fail("expected a numeric literal");
    };
    auto read_predicate = [&]() { return parse_predicate(lex, sym); };

    while (!lex.at_end()) {
        const Token tok = lex.next();
        if (tok.kind != Token::Ident) lex.fail_at(tok, "expected record keyword");
        const std::string& rec = tok.text;
        if (rec == "end") break;
        if (rec == "const") {
            const std::string name = lex.expect_ident("as constant name").text;
            lex.expect("=", "after constant name");
            const Matrix value = read_matrix();
            out.prog.constants[name] = value;
            sym.constants[name] = value;
        } else if (rec == "var") {
            const std::string name = lex.expect_ident("as variable name").text;
            const std::size_t r = (std::size_t)lex.expect_number("as rows").number;
            const std::size_t c = (std::size_t)lex.expect_number("as cols").number;
            out.prog.var_shapes[name] = {r, c};
            sym.shapes.vars[name] = {r, c};
        } else if (rec == "external") {
            ExternalDecl e;
            e.name = lex.expect_ident("as external name").text;
            e.arity = (std::size_t)lex.expect_number("as arity").number;
            e.result_rows = (std::size_t)lex.expect_number("as result rows").number;
            e.result_cols = (std::size_t)lex.expect_number("as result cols").number;
            sym.shapes.fn_arity[e.name] = e.arity;
            sym.shapes.fn_results[e.name] = {e.result_rows, e.result_cols};
            out.prog.externals.push_back(std::move(e));
        } else if (rec == "stmt") {
            Statement s;
            const Token kind = lex.expect_ident("as statement kind");
            if (kind.text == "input") {
                s.kind = StatementKind::Input;
                s.var = lex.expect_ident("as input variable").text;
            } else if (kind.text == "assign") {
                s.kind = StatementKind::Assign;
                s.var = lex.expect_ident("as assigned variable").text;
                lex.expect("=", "in assignment");
                s.expr = parse_expression(lex, sym);
            } else if (kind.text == "output") {
                s.kind = StatementKind::Output;
                s.expr = parse_expression(lex, sym);
            } else {
                lex.fail_at(kind, "unknown statement kind '" + kind.text + "'");
            }
            out.prog.statements.push_back(std::move(s));
        } else if (rec == "span") {
            LoopSpan sp;
            sp.id = lex.expect_ident("as span id").text;
            sp.first = (std::size_t)lex.expect_number("as span start").number;
            sp.last = (std::size_t)lex.expect_number("as span end").number;
            out.prog.spans.push_back(std::move(sp));
        } else if (rec == "contract") {
            Contract c;
            c.loop_id = lex.next().text;
            if (c.loop_id == "-") c.loop_id.clear();
            const Token kind = lex.expect_ident("as contract kind");
            if (kind.text == "require") {
                c.kind = ContractKind::Require;
            } else if (kind.text == "assume") {
                c.kind = ContractKind::Assume;
            } else if (kind.text == "ensure") {
                c.kind = ContractKind::Ensure;
            } else {
                lex.fail_at(kind, "unknown contract kind");
            }
            c.role = role_from(lex.expect_ident("as contract role").text);
            const Token pos = lex.expect_ident("as anchor position");
            if (pos.text == "before") {
                c.before = true;
            } else if (pos.text == "after") {
                c.before = false;
            } else {
                lex.fail_at(pos, "expected before/after");
            }
            c.anchor = (std::size_t)lex.expect_number("as anchor index").number;
            lex.expect(":", "before contract payload");
            if (c.kind == ContractKind::Assume && c.role == ContractRole::PlantUpdate) {
                c.update_var = lex.expect_ident("as updated variable").text;
                lex.expect("=", "in update");
                c.update_expr = parse_expression(lex, sym);
            } else {
                c.pred = read_predicate();
            }
            out.prog.contracts.push_back(std::move(c));
        } else if (rec == "step") {
            PropagationStep s;
            s.loop_id = lex.next().text;
            const Token dir = lex.expect_ident("as step direction");
            s.forward = dir.text == "forward";
            if (!s.forward && dir.text != "backward") {
                lex.fail_at(dir, "expected forward/backward");
            }
            const Token what = lex.expect_ident("as step kind");
            s.plant_step = what.text == "plant";
            if (!s.plant_step && what.text != "stmt") {
                lex.fail_at(what, "expected plant/stmt");
            }
            s.statement = (std::size_t)lex.expect_number("as statement index").number;
            lex.expect(":", "before step payload");
            s.in_pred = read_predicate();
            lex.expect("->", "between step predicates");
            s.out_pred = read_predicate();
            out.steps.push_back(std::move(s));
        } else if (rec == "fact") {
            DomainFact f;
            f.var = lex.expect_ident("as fact variable").text;
            while (lex.peek().text == "[") {
                lex.next();
                const double lo = lex.expect_number("as interval low").number;
                lex.expect(",", "in interval");
                const double hi = lex.expect_number("as interval high").number;
                lex.expect("]", "to close interval");
                f.box.emplace_back(lo, hi);
            }
            lex.expect(":", "before fact provenance");
            f.provenance = lex.expect_ident("as provenance").text;
            out.facts.push_back(std::move(f));
        } else {
            lex.fail_at(tok, "unknown record '" + rec + "'");
        }
    }
    return out;
}

}  // namespace credo
