#include "doctest.h"

#include "credo/errors.hpp"
#include "credo/model_parse.hpp"
#include "credo/validate.hpp"

using namespace credo;

namespace {

const char* kMinimalModel = R"(
model tiny
signals {
  x : vec 2 input
  y : vec 2 output
}
blocks {
  gain g { in x out y matrix [[1, 0], [0, 2]] }
}
)";

// two-loop toy shaped like the case study: a linear loop and a general loop
const char* kTwoLoopModel = R"(
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

}  // namespace

TEST_CASE("minimal model parses to one block and no annotations") {
    const ParseResult r = parse_model(kMinimalModel);
    REQUIRE(r.ok());
    CHECK(r.model->blocks.size() == 1);
    CHECK(r.model->annotations.empty());
    CHECK(r.model->signals.size() == 2);
}

TEST_CASE("parse print parse is a fixpoint on the corpus") {
    for (const char* text : {kMinimalModel, kTwoLoopModel}) {
        CAPTURE(text);
        const ParseResult r1 = parse_model(text);
        REQUIRE(r1.ok());
        const std::string printed = print_model(*r1.model);
        const ParseResult r2 = parse_model(printed);
        REQUIRE(r2.ok());
        CHECK(model_equal(*r1.model, *r2.model));
        CHECK(print_model(*r2.model) == printed);
    }
}

TEST_CASE("consumed but never produced signal is named in the error") {
    const char* text = R"(
model bad
signals {
  x : vec 2
  y : vec 2 output
}
blocks {
  gain g { in x out y matrix [[1, 0], [0, 2]] }
}
)";
    const ParseResult r = parse_model(text);
    REQUIRE_FALSE(r.ok());
    CHECK(r.diagnostics.front().message.find("'x'") != std::string::npos);
    CHECK(r.diagnostics.front().message.find("never produced") != std::string::npos);
}

TEST_CASE("duplicate producers and unknown kinds are rejected") {
    const char* dup = R"(
model bad
signals {
  x : vec 1 input
  y : vec 1
}
blocks {
  gain g1 { in x out y matrix [[1]] }
  gain g2 { in x out y matrix [[2]] }
}
)";
    CHECK_FALSE(parse_model(dup).ok());

    const char* unknown = R"(
model bad
signals { x : vec 1 input }
blocks { integrator i { in x out x } }
)";
    const ParseResult r = parse_model(unknown);
    REQUIRE_FALSE(r.ok());
    CHECK(r.diagnostics.front().message.find("unknown block kind") != std::string::npos);
}

TEST_CASE("unknown keys are rejected") {
    const char* text = R"(
model bad
signals { x : vec 1 input wobble }
)";
    CHECK_FALSE(parse_model(text).ok());
}

TEST_CASE("validate finds the two loops in declaration order") {
    const ParseResult r = parse_model(kTwoLoopModel);
    REQUIRE(r.ok());
    const ValidateResult v = validate_model(*r.model);
    REQUIRE(v.ok());
    REQUIRE(v.loops.size() == 2);
    CHECK(v.loops[0].subsystem == "lin");
    CHECK(v.loops[1].subsystem == "nl");
    // observers attach to their loops
    CHECK(v.loops[1].invariant_known);
    CHECK(v.loops[0].invariant_known);
    CHECK(r.model->annotations[v.loops[0].plant].kind == AnnotationKind::LinearPlant);
    CHECK(r.model->annotations[v.loops[1].plant].kind == AnnotationKind::GeneralPlant);

    // determinism: re-validate gives the same loops
    const ValidateResult v2 = validate_model(*r.model);
    REQUIRE(v2.loops.size() == v.loops.size());
    for (std::size_t i = 0; i < v.loops.size(); ++i) {
        CHECK(v2.loops[i].controller_blocks == v.loops[i].controller_blocks);
        CHECK(v2.loops[i].plant == v.loops[i].plant);
    }
}

TEST_CASE("model with no annotations yields zero loops without error") {
    const ParseResult r = parse_model(kMinimalModel);
    REQUIRE(r.ok());
    const ValidateResult v = validate_model(*r.model);
    CHECK(v.ok());
    CHECK(v.loops.empty());
}

TEST_CASE("plant dimension mismatch is diagnosed") {
    const char* text = R"(
model bad
signals {
  e : vec 3 input
  v : vec 2
}
blocks {
  gain ctrl { subsystem lin in e out v matrix [[1, 0, 0], [0, 1, 0]] }
}
plants {
  linear p1 { subsystem lin inputs v outputs e A [[1, 0, 0], [0, 1, 0], [0, 0, 1]] B [[1], [0], [0]] }
}
)";
    const ParseResult r = parse_model(text);
    REQUIRE(r.ok());
    const ValidateResult v = validate_model(*r.model);
    REQUIRE_FALSE(v.ok());
    bool found = false;
    for (const Diagnostic& d : v.diagnostics) {
        if (d.message.find("B is") != std::string::npos) found = true;
    }
    CHECK(found);
}

TEST_CASE("observer watching unknown signals is rejected at parse") {
    const char* text = R"(
model bad
signals { x : vec 1 input }
observers { general o { watch nosuch pred nosuch'*nosuch <= 1 } }
)";
    CHECK_FALSE(parse_model(text).ok());
}

TEST_CASE("computation cycles are diagnosed") {
    const char* text = R"(
model bad
signals {
  a : vec 1
  b : vec 1
}
blocks {
  gain g1 { in a out b matrix [[1]] }
  gain g2 { in b out a matrix [[1]] }
}
)";
    const ParseResult r = parse_model(text);
    REQUIRE(r.ok());
    const ValidateResult v = validate_model(*r.model);
    REQUIRE_FALSE(v.ok());
    CHECK(v.diagnostics.front().message.find("cycle") != std::string::npos);
}

TEST_CASE("predicates in models reference only declared signals") {
    const ParseResult r = parse_model(kTwoLoopModel);
    REQUIRE(r.ok());
    for (const AnnotationBlock& a : r.model->annotations) {
        for (const std::string& v : free_vars(a.observer_pred)) {
            CHECK(r.model->find_signal(v) != nullptr);
        }
        if (a.update) {
            for (const std::string& v : free_vars(a.update)) {
                CHECK(r.model->find_signal(v) != nullptr);
            }
        }
    }
}
