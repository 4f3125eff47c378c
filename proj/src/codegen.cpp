#include "credo/codegen.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "credo/errors.hpp"
#include "credo/validate.hpp"
#include "credo/vcfile.hpp"

namespace credo {

namespace {

// loop label for span ids: loop#1, loop#2, ... by plant declaration order
std::string loop_label(std::size_t i) { return "loop" + std::to_string(i + 1); }

class ProgramBuilder {
public:
    ProgramBuilder(const Model& m, const std::vector<Loop>& loops) : m_(m), loops_(loops) {}

    AnnotatedProgram build() {
        index_model();
        const std::vector<std::size_t> order = block_order();
        emit_statements(order);
        finalize_symbols();
        return std::move(prog_);
    }

private:
    void index_model() {
        for (std::size_t i = 0; i < m_.blocks.size(); ++i) {
            producer_[m_.blocks[i].output] = i;
        }
        for (std::size_t li = 0; li < loops_.size(); ++li) {
            for (std::size_t bi : loops_[li].controller_blocks) {
                loop_of_block_[bi] = li;
            }
        }
    }

    // expression a block computes, with temp-signal producers fused in
    Expr block_expr(const Block& b) {
        switch (b.kind) {
            case BlockKind::Gain:
                return mul(matrix_const(b.gain_ref, b.gain_value, "gain " + b.name),
                           input_expr(b.inputs.at(0)));
            case BlockKind::Sum: {
                Expr e;
                for (std::size_t i = 0; i < b.inputs.size(); ++i) {
                    const int sign =
                        b.sum_signs.empty() ? 1 : b.sum_signs.at(i);
                    Expr term = input_expr(b.inputs[i]);
                    if (!e) {
                        e = sign > 0 ? term : neg(term);
                    } else {
                        e = sign > 0 ? add(e, term) : sub(e, term);
                    }
                }
                return e;
            }
            case BlockKind::Product: {
                Expr a = input_expr(b.inputs.at(0));
                if (b.product_transpose_first) a = transpose(a);
                return mul(a, input_expr(b.inputs.at(1)));
            }
            case BlockKind::Saturation:
                return sat(input_expr(b.inputs.at(0)), b.sat_lo, b.sat_hi);
            case BlockKind::Trig:
                return b.trig_is_sin ? sin_expr(input_expr(b.inputs.at(0)))
                                     : cos_expr(input_expr(b.inputs.at(0)));
            case BlockKind::Constant:
                return matrix_const(b.const_ref, b.const_value, "constant " + b.name);
            case BlockKind::External: {
                std::vector<Expr> args;
                for (const std::string& in : b.inputs) args.push_back(input_expr(in));
                return apply(b.external_fn, std::move(args));
            }
        }
        throw Error("unreachable block kind");
    }

    Expr input_expr(const std::string& signal) {
        const Signal* s = m_.find_signal(signal);
        if (s && s->is_temp) {
            auto p = producer_.find(signal);
            if (p == producer_.end()) {
                throw ValidationError("temp signal '" + signal + "' has no producer");
            }
            return block_expr(m_.blocks[p->second]);
        }
        return var(signal);
    }

    Expr matrix_const(const std::string& ref, const std::optional<Matrix>& literal,
                      const std::string& what) {
        if (!ref.empty() && ref != "auto") {
            const Matrix value = m_.binding_value(ref);  // throws if unresolved
            used_constants_[ref] = value;
            return cst(value, ref);
        }
        if (ref == "auto") {
            throw ValidationError(what + ": matrix is still unresolved (auto)");
        }
        if (!literal) throw ValidationError(what + ": missing matrix value");
        return cst(*literal);
    }

    // topological order over non-temp blocks; ready set picks loop-mates of
    // the previously emitted block first, then lowest declaration index
    std::vector<std::size_t> block_order() {
        std::vector<std::size_t> blocks;
        for (std::size_t i = 0; i < m_.blocks.size(); ++i) {
            const Signal* out = m_.find_signal(m_.blocks[i].output);
            if (!out || !out->is_temp) blocks.push_back(i);
        }
        // dependency edges: block -> producer of any (transitively fused) input
        auto deps = [&](std::size_t bi) {
            std::set<std::size_t> out;
            std::vector<std::string> queue = m_.blocks[bi].inputs;
            while (!queue.empty()) {
                const std::string sig = queue.back();
                queue.pop_back();
                auto p = producer_.find(sig);
                if (p == producer_.end()) continue;
                const Signal* s = m_.find_signal(sig);
                if (s && s->is_temp) {
                    for (const std::string& in : m_.blocks[p->second].inputs) {
                        queue.push_back(in);
                    }
                } else {
                    out.insert(p->second);
                }
            }
            return out;
        };

        std::map<std::size_t, std::set<std::size_t>> pending;
        for (std::size_t bi : blocks) pending[bi] = deps(bi);

        std::vector<std::size_t> order;
        std::set<std::size_t> done;
        int last_loop = -1;
        while (order.size() < blocks.size()) {
            std::vector<std::size_t> ready;
            for (std::size_t bi : blocks) {
                if (done.count(bi)) continue;
                bool ok = true;
                for (std::size_t d : pending[bi]) {
                    if (!done.count(d)) ok = false;
                }
                if (ok) ready.push_back(bi);
            }
            if (ready.empty()) {
                throw ValidationError("cyclic dependency among blocks during codegen");
            }
            std::size_t pick = ready.front();
            if (last_loop >= 0) {
                for (std::size_t bi : ready) {
                    auto l = loop_of_block_.find(bi);
                    if (l != loop_of_block_.end() &&
                        l->second == static_cast<std::size_t>(last_loop)) {
                        pick = bi;
                        break;
                    }
                }
            }
            order.push_back(pick);
            done.insert(pick);
            auto l = loop_of_block_.find(pick);
            last_loop = l == loop_of_block_.end() ? -1 : static_cast<int>(l->second);
        }
        return order;
    }

    void emit_statements(const std::vector<std::size_t>& order) {
        // first consumer position of each input signal, with loop pull-ahead:
        // inputs consumed inside a loop anchor at the loop's first statement
        std::map<std::size_t, std::size_t> block_pos;
        for (std::size_t k = 0; k < order.size(); ++k) block_pos[order[k]] = k;

        std::map<std::size_t, std::size_t> first_loop_pos;  // loop -> min position
        for (std::size_t k = 0; k < order.size(); ++k) {
            auto l = loop_of_block_.find(order[k]);
            if (l != loop_of_block_.end() && !first_loop_pos.count(l->second)) {
                first_loop_pos[l->second] = k;
            }
        }

        std::map<std::size_t, std::vector<std::string>> inputs_at;  // position -> signals
        for (const Signal& s : m_.signals) {
            if (!s.is_input) continue;
            std::size_t anchor = order.size();
            for (std::size_t k = 0; k < order.size(); ++k) {
                const Block& b = m_.blocks[order[k]];
                if (consumes(b, s.name)) {
                    auto l = loop_of_block_.find(order[k]);
                    anchor = l != loop_of_block_.end() ? first_loop_pos[l->second] : k;
                    break;
                }
            }
            inputs_at[anchor].push_back(s.name);
        }

        std::map<std::size_t, std::vector<std::size_t>> stmt_of_loop;
        for (std::size_t k = 0; k <= order.size(); ++k) {
            for (const std::string& sig : inputs_at[k]) {
                Statement st;
                st.kind = StatementKind::Input;
                st.var = sig;
                st.source = sig;
                prog_.statements.push_back(std::move(st));
            }
            if (k == order.size()) break;
            const Block& b = m_.blocks[order[k]];
            Statement st;
            st.kind = StatementKind::Assign;
            st.var = b.output;
            st.expr = block_expr(b);
            st.source = b.name;
            prog_.statements.push_back(std::move(st));
            auto l = loop_of_block_.find(order[k]);
            if (l != loop_of_block_.end()) {
                stmt_of_loop[l->second].push_back(prog_.statements.size() - 1);
            }
            const Signal* out = m_.find_signal(b.output);
            if (out && out->is_output) {
                Statement o;
                o.kind = StatementKind::Output;
                o.expr = var(b.output);
                o.source = b.output;
                prog_.statements.push_back(std::move(o));
                if (l != loop_of_block_.end()) {
                    stmt_of_loop[l->second].push_back(prog_.statements.size() - 1);
                }
            }
        }

        for (std::size_t li = 0; li < loops_.size(); ++li) {
            const auto& stmts = stmt_of_loop[li];
            if (stmts.empty()) continue;
            LoopSpan span;
            span.id = loop_label(li);
            span.first = stmts.front();
            span.last = stmts.back();
            // spans must cover exactly their loop's statements, contiguously
            for (std::size_t k = span.first; k <= span.last; ++k) {
                if (std::find(stmts.begin(), stmts.end(), k) == stmts.end()) {
                    throw ValidationError("loop " + span.id +
                                          " statements are not contiguous");
                }
            }
            prog_.spans.push_back(std::move(span));
        }
        for (std::size_t i = 0; i < prog_.spans.size(); ++i) {
            for (std::size_t j = i + 1; j < prog_.spans.size(); ++j) {
                if (prog_.spans[i].first <= prog_.spans[j].last &&
                    prog_.spans[j].first <= prog_.spans[i].last) {
                    throw ValidationError("overlapping loop spans");
                }
            }
        }
    }

    bool consumes(const Block& b, const std::string& signal) {
        for (const std::string& in : b.inputs) {
            if (in == signal) return true;
            const Signal* s = m_.find_signal(in);
            if (s && s->is_temp) {
                auto p = producer_.find(in);
                if (p != producer_.end() && consumes(m_.blocks[p->second], signal)) {
                    return true;
                }
            }
        }
        return false;
    }

    void finalize_symbols() {
        prog_.model_name = m_.name;
        for (const Signal& s : m_.signals) {
            if (!s.is_temp) prog_.var_shapes[s.name] = s.shape();
        }
        prog_.externals = m_.externals;
        prog_.constants = used_constants_;
    }

    const Model& m_;
    const std::vector<Loop>& loops_;
    AnnotatedProgram prog_;
    std::map<std::string, std::size_t> producer_;
    std::map<std::size_t, std::size_t> loop_of_block_;
    std::map<std::string, Matrix> used_constants_;
};

}  // namespace

AnnotatedProgram generate_program(const Model& m, const std::vector<Loop>& loops) {
    return ProgramBuilder(m, loops).build();
}

namespace {

// named constants inside placed predicates must be registered so the
// machine-vc serialization can resolve them on re-parse
void register_named_constants(AnnotatedProgram& prog, const Expr& e) {
    if (!e) return;
    if ((e->kind == ExprKind::Const || e->kind == ExprKind::Quad) && !e->name.empty()) {
        prog.constants.emplace(e->name, e->value);
    }
    for (const Expr& a : e->args) register_named_constants(prog, a);
}

void register_named_constants(AnnotatedProgram& prog, const Predicate& p) {
    for (const Comparison& c : p.conjuncts) {
        register_named_constants(prog, c.lhs);
        register_named_constants(prog, c.rhs);
    }
}

}  // namespace

AnnotatedProgram place_annotations(const AnnotatedProgram& prog, const Model& m,
                                   const std::vector<Loop>& loops,
                                   const std::vector<LoopAssumption>& assumptions,
                                   bool skip_missing_invariants) {
    AnnotatedProgram out = prog;
    // idempotence: drop previously placed contracts of the roles we own
    out.contracts.erase(
        std::remove_if(out.contracts.begin(), out.contracts.end(),
                       [](const Contract& c) {
                           return c.role == ContractRole::InsertedRequire ||
                                  c.role == ContractRole::InsertedEnsure ||
                                  c.role == ContractRole::PlantUpdate ||
                                  c.role == ContractRole::Assumption;
                       }),
        out.contracts.end());

    for (std::size_t li = 0; li < loops.size(); ++li) {
        const Loop& loop = loops[li];
        const std::string id = loop_label(li);
        const LoopSpan* span = out.find_span(id);
        if (!span) {
            throw ValidationError("no statement span for " + id);
        }
        if (!loop.invariant_known) {
            if (skip_missing_invariants) continue;
            throw ValidationError(id + " has no inductive invariant to place");
        }

        register_named_constants(out, loop.invariant);
        Contract req;
        req.kind = ContractKind::Require;
        req.role = ContractRole::InsertedRequire;
        req.pred = loop.invariant;
        req.anchor = span->first;
        req.before = true;
        req.loop_id = id;
        out.contracts.push_back(req);

        Contract ens = req;
        ens.kind = ContractKind::Ensure;
        ens.role = ContractRole::InsertedEnsure;
        ens.anchor = span->last;
        ens.before = false;
        out.contracts.push_back(ens);

        // plant model as an assumed state update at span end
        const AnnotationBlock& plant = m.annotations.at(loop.plant);
        Contract upd;
        upd.kind = ContractKind::Assume;
        upd.role = ContractRole::PlantUpdate;
        upd.anchor = span->last;
        upd.before = false;
        upd.loop_id = id;
        if (plant.kind == AnnotationKind::GeneralPlant) {
            upd.update_var = plant.state_signal;
            upd.update_expr = plant.update;
            register_named_constants(out, plant.update);
        } else {
            if (plant.plant_outputs.size() != 1 || plant.plant_inputs.size() != 1) {
                throw ValidationError(id + ": linear plant updates need exactly one "
                                           "state signal and one input signal");
            }
            if (!plant.a || !plant.b) {
                throw ValidationError(id + ": linear plant matrices unresolved");
            }
            upd.update_var = plant.plant_outputs[0];
            upd.update_expr = add(mul(cst(*plant.a, "A"), var(plant.plant_outputs[0])),
                                  mul(cst(*plant.b, "B"), var(plant.plant_inputs[0])));
            out.constants["A"] = *plant.a;
            out.constants["B"] = *plant.b;
        }
        out.contracts.push_back(std::move(upd));
    }

    // non-inductive assumptions anchor at the first statement assigning (or
    // inputting) one of their variables
    for (const LoopAssumption& a : assumptions) {
        const auto vars = free_vars(a.pred);
        std::size_t anchor = out.statements.size();
        for (std::size_t k = 0; k < out.statements.size(); ++k) {
            const Statement& st = out.statements[k];
            if ((st.kind == StatementKind::Assign || st.kind == StatementKind::Input) &&
                vars.count(st.var)) {
                anchor = k;
                break;
            }
        }
        if (anchor == out.statements.size()) {
            throw ValidationError("assumption '" + a.origin +
                                  "' references variables never assigned");
        }
        register_named_constants(out, a.pred);
        Contract c;
        c.kind = ContractKind::Assume;
        c.role = ContractRole::Assumption;
        c.pred = a.pred;
        c.anchor = anchor;
        c.before = false;  // attach right at the defining statement
        c.loop_id = a.origin;
        out.contracts.push_back(std::move(c));
    }

    const auto offenders = def_before_use_violations(out);
    if (!offenders.empty()) {
        throw ValidationError("contract placement uses undefined variable " + offenders.front());
    }
    return out;
}

// ---- emission -------------------------------------------------------------------

namespace {

const char* kind_word(ContractKind k) {
    switch (k) {
        case ContractKind::Require: return "requires";
        case ContractKind::Assume: return "assumes";
        case ContractKind::Ensure: return "ensures";
    }
    return "";
}

std::string matlab_statement(const Statement& s, const PrintStyle& style) {
    switch (s.kind) {
        case StatementKind::Input:
            return s.var + " = Input();";
        case StatementKind::Assign:
            return s.var + " = " + to_string(s.expr, style) + ";";
        case StatementKind::Output:
            return "Output(" + to_string(s.expr, style) + ");";
    }
    return "";
}

void emit_contract_block(std::ostringstream& os, std::vector<const Contract*>& block,
                         const PrintStyle& style) {
    if (block.empty()) return;
    // requires, then assumes, then ensures, stable within kinds
    std::stable_sort(block.begin(), block.end(), [](const Contract* a, const Contract* b) {
        return static_cast<int>(a->kind) < static_cast<int>(b->kind);
    });
    os << "/*@\n";
    for (const Contract* c : block) {
        os << "  " << kind_word(c->kind) << " ";
        if (c->kind == ContractKind::Assume && c->update_expr) {
            os << c->update_var << " = " << to_string(c->update_expr, style);
        } else {
            os << to_string(c->pred, style);
        }
        os << ";\n";
    }
    os << "*/\n";
    block.clear();
}

std::string emit_matlab(const AnnotatedProgram& prog) {
    PrintStyle style;
    style.matlab_sat = true;
    std::ostringstream os;
    os << "% " << prog.model_name << " : annotated controller step\n";
    if (!prog.constants.empty()) {
        os << "% constants:\n";
        for (const auto& [name, value] : prog.constants) {
            std::ostringstream line;
            line << "%   " << name << " = " << to_string(cst(value));
            os << line.str() << "\n";
        }
    }
    os << "\n";
    if (prog.statements.empty()) {
        os << "% empty program\n";
        return os.str();
    }

    for (std::size_t k = 0; k < prog.statements.size(); ++k) {
        std::vector<const Contract*> block;
        for (const Contract& c : prog.contracts) {
            if (c.before && c.anchor == k) block.push_back(&c);
        }
        emit_contract_block(os, block, style);
        os << matlab_statement(prog.statements[k], style) << "\n";
        for (const Contract& c : prog.contracts) {
            if (!c.before && c.anchor == k) block.push_back(&c);
        }
        emit_contract_block(os, block, style);
    }
    return os.str();
}

}  // namespace

std::string emit_text(const AnnotatedProgram& prog, EmitStyle style) {
    if (style == EmitStyle::MatlabLike) return emit_matlab(prog);
    return write_vc_text(VcFile{prog, {}, {}});
}

}  // namespace credo
