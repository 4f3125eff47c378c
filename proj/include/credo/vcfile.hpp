#pragma once

#include <string>
#include <vector>

#include "credo/interval.hpp"
#include "credo/program.hpp"
#include "credo/propagation.hpp"

namespace credo {

// Per-variable interval fact with a short provenance tag (identifier).
struct DomainFact {
    std::string var;
    std::vector<Interval> box;  // one interval per scalar component
    std::string provenance;
};

// Everything the verifier consumes: the annotated program, the propagation
// steps for audit, and the physical domain facts.
struct VcFile {
    AnnotatedProgram prog;
    std::vector<PropagationStep> steps;
    std::vector<DomainFact> facts;
};

// Line-oriented serialization (the `machine-vc` emit style). Deterministic;
// numbers print in shortest round-trip form.
std::string write_vc_text(const VcFile& file);

// Inverse of write_vc_text; throws ParseError on malformed input.
VcFile parse_vc(const std::string& text);

}  // namespace credo
