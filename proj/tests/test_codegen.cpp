#include <algorithm>

#include "doctest.h"

#include "credo/codegen.hpp"
#include "credo/errors.hpp"
#include "credo/expr_parse.hpp"
#include "credo/model_parse.hpp"
#include "credo/validate.hpp"
#include "credo/vcfile.hpp"

using namespace credo;

namespace {

const char* kGainOnly = R"(
model tiny
signals {
  x : vec 2 input
  y : vec 2 output
}
blocks {
  gain g { in x out y matrix [[1, 0], [0, 2]] }
}
)";

const char* kTwoLoop = R"(
model twoloop
bindings {
  c_sat = 1
  dt = 0.1
  gainK = [[0.5]]
}
signals {
  e  : vec 1 input
  v  : vec 1
  w  : vec 1 input
  sw : vec 1 temp
  tq : vec 1 output
}
blocks {
  gain ctrl { subsystem lin in e out v matrix gainK }
  saturation satw { subsystem nl in w out sw lo -c_sat hi c_sat }
  gain amp { subsystem nl in sw out tq matrix [[2]] }
}
plants {
  linear plant1 { subsystem lin inputs v outputs e A [[0.5]] B [[0.2]] }
  general plant2 { subsystem nl state w inputs tq update w - dt*tq }
}
observers {
  general wset { watch w pred w'*w <= 1 }
  ellipsoid eset { watch e P [[4]] }
}
)";

AnnotatedProgram build(const char* text, Model& model_out, std::vector<Loop>& loops_out) {
    const ParseResult r = parse_model(text);
    REQUIRE(r.ok());
    const ValidateResult v = validate_model(*r.model);
    REQUIRE(v.ok());
    model_out = *r.model;
    loops_out = v.loops;
    return generate_program(model_out, loops_out);
}

}  // namespace

TEST_CASE("single gain block compiles to input, assign, output") {
    Model m;
    std::vector<Loop> loops;
    const AnnotatedProgram prog = build(kGainOnly, m, loops);
    REQUIRE(prog.statements.size() == 3);
    CHECK(prog.statements[0].kind == StatementKind::Input);
    CHECK(prog.statements[0].var == "x");
    CHECK(prog.statements[1].kind == StatementKind::Assign);
    CHECK(prog.statements[1].var == "y");
    CHECK(prog.statements[2].kind == StatementKind::Output);
    CHECK(prog.contracts.empty());
}

TEST_CASE("two-loop model produces contiguous spans and fused temps") {
    Model m;
    std::vector<Loop> loops;
    const AnnotatedProgram prog = build(kTwoLoop, m, loops);
    // statements: e=Input, v=gainK*e, w=Input, tq=2*sat(w), Output(tq)
    REQUIRE(prog.spans.size() == 2);
    const LoopSpan& s1 = *prog.find_span("loop1");
    const LoopSpan& s2 = *prog.find_span("loop2");
    CHECK(s1.first == s1.last);
    CHECK(s2.first < s2.last);
    CHECK(s1.last < s2.first);
    // sat fused into the amp statement
    bool fused = false;
    for (const Statement& st : prog.statements) {
        if (st.kind == StatementKind::Assign && st.var == "tq") {
            fused = free_vars(st.expr).count("w") == 1;
        }
    }
    CHECK(fused);
}

TEST_CASE("both topological orders of independent blocks are legal programs") {
    // two independent gains; swapping declaration order swaps the statement
    // order, and each is a valid topological order of the other
    const char* a = R"(
model ind
signals {
  x : vec 1 input
  p : vec 1 output
  q : vec 1 output
}
blocks {
  gain g1 { in x out p matrix [[1]] }
  gain g2 { in x out q matrix [[2]] }
}
)";
    const char* b = R"(
model ind
signals {
  x : vec 1 input
  p : vec 1 output
  q : vec 1 output
}
blocks {
  gain g2 { in x out q matrix [[2]] }
  gain g1 { in x out p matrix [[1]] }
}
)";
    Model ma, mb;
    std::vector<Loop> la, lb;
    const AnnotatedProgram pa = build(a, ma, la);
    const AnnotatedProgram pb = build(b, mb, lb);
    // same statement multiset, both in declaration order
    auto assigned = [](const AnnotatedProgram& p) {
        std::vector<std::string> out;
        for (const Statement& s : p.statements) {
            if (s.kind == StatementKind::Assign) out.push_back(s.var);
        }
        return out;
    };
    const auto va = assigned(pa);
    const auto vb = assigned(pb);
    CHECK(va == std::vector<std::string>{"p", "q"});
    CHECK(vb == std::vector<std::string>{"q", "p"});
    // dataflow correctness: each var defined before used (no contracts here)
    CHECK(def_before_use_violations(pa).empty());
    CHECK(def_before_use_violations(pb).empty());
}

TEST_CASE("place annotations brackets each loop and assumes the plant update") {
    Model m;
    std::vector<Loop> loops;
    AnnotatedProgram prog = build(kTwoLoop, m, loops);
    prog = place_annotations(prog, m, loops);

    const LoopSpan& s1 = *prog.find_span("loop1");
    const LoopSpan& s2 = *prog.find_span("loop2");
    int found = 0;
    for (const Contract& c : prog.contracts) {
        if (c.role == ContractRole::InsertedRequire && c.loop_id == "loop1") {
            CHECK(c.anchor == s1.first);
            CHECK(c.before);
            ++found;
        }
        if (c.role == ContractRole::InsertedEnsure && c.loop_id == "loop1") {
            CHECK(c.anchor == s1.last);
            CHECK_FALSE(c.before);
            ++found;
        }
        if (c.role == ContractRole::PlantUpdate && c.loop_id == "loop1") {
            CHECK(c.update_var == "e");
            ++found;
        }
        if (c.role == ContractRole::PlantUpdate && c.loop_id == "loop2") {
            CHECK(c.update_var == "w");
            CHECK(free_vars(c.update_expr).count("tq") == 1);
            ++found;
        }
    }
    CHECK(found == 4);
    CHECK(def_before_use_violations(prog).empty());
}

TEST_CASE("placement is idempotent") {
    Model m;
    std::vector<Loop> loops;
    AnnotatedProgram prog = build(kTwoLoop, m, loops);
    const AnnotatedProgram once = place_annotations(prog, m, loops);
    const AnnotatedProgram twice = place_annotations(once, m, loops);
    CHECK(program_equal(once, twice));
}

TEST_CASE("placement on an empty program with no loops is the identity") {
    Model m;
    m.name = "empty";
    AnnotatedProgram prog;
    prog.model_name = "empty";
    const AnnotatedProgram placed = place_annotations(prog, m, {});
    CHECK(program_equal(prog, placed));
}

TEST_CASE("non-inductive assumptions anchor at the first assignment") {
    Model m;
    std::vector<Loop> loops;
    AnnotatedProgram prog = build(kTwoLoop, m, loops);
    LoopAssumption fact;
    fact.origin = "range fact";
    ParserSymbols sym;
    sym.shapes.vars["tq"] = Shape{1, 1};
    fact.pred = parse_predicate("tq'*tq <= 9", sym);
    const AnnotatedProgram placed = place_annotations(prog, m, loops, {fact});
    bool found = false;
    for (const Contract& c : placed.contracts) {
        if (c.role != ContractRole::Assumption) continue;
        found = true;
        CHECK(placed.statements[c.anchor].var == "tq");
        CHECK_FALSE(c.before);
    }
    CHECK(found);

    LoopAssumption ghost;
    ghost.origin = "ghost";
    sym.shapes.vars["nothing"] = Shape{1, 1};
    sym.allow_unknown_vars = true;
    ghost.pred = parse_predicate("nothing <= 1", sym);
    CHECK_THROWS_AS(place_annotations(prog, m, loops, {ghost}), ValidationError);
}

TEST_CASE("placement rejects invariants over never-assigned variables") {
    Model m;
    std::vector<Loop> loops;
    AnnotatedProgram prog = build(kTwoLoop, m, loops);
    loops[0].invariant = pred_le(dot(var("ghost"), var("ghost")), cst(1.0));
    CHECK_THROWS_AS(place_annotations(prog, m, loops), ValidationError);
}

TEST_CASE("matlab emission is deterministic and shows the contract blocks") {
    Model m;
    std::vector<Loop> loops;
    AnnotatedProgram prog = build(kTwoLoop, m, loops);
    prog = place_annotations(prog, m, loops);
    const std::string text1 = emit_text(prog, EmitStyle::MatlabLike);
    const std::string text2 = emit_text(prog, EmitStyle::MatlabLike);
    CHECK(text1 == text2);
    CHECK(text1.find("requires w'*w <= 1") != std::string::npos);
    CHECK(text1.find("ensures w'*w <= 1") != std::string::npos);
    CHECK(text1.find("assumes e = A*e + B*v") != std::string::npos);
    CHECK(text1.find("saturate(w)") != std::string::npos);
}

TEST_CASE("empty program emits a header-only listing") {
    AnnotatedProgram prog;
    prog.model_name = "void";
    const std::string text = emit_text(prog, EmitStyle::MatlabLike);
    CHECK(text.find("void") != std::string::npos);
    CHECK(text.find("empty program") != std::string::npos);
}

TEST_CASE("machine-vc emit and parse round trip is the identity") {
    Model m;
    std::vector<Loop> loops;
    AnnotatedProgram prog = build(kTwoLoop, m, loops);
    prog = place_annotations(prog, m, loops);
    const std::string text = emit_text(prog, EmitStyle::MachineVc);
    const VcFile back = parse_vc(text);
    CHECK(program_equal(prog, back.prog));
    // and byte-stable through a second round
    CHECK(write_vc_text(VcFile{back.prog, back.steps, back.facts}) == text);
}
