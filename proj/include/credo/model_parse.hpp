#pragma once

#include <optional>
#include <string>
#include <vector>

#include "credo/model.hpp"

namespace credo {

struct ParseResult {
    std::optional<Model> model;
    std::vector<Diagnostic> diagnostics;  // non-empty iff model is absent

    bool ok() const { return model.has_value(); }
};

// Parses the model-file grammar (sections: bindings, signals, externals,
// blocks, plants, observers — in that order, each optional). Unknown keys are
// rejected. Structural checks performed here: declared-signal references and
// the single-producer rule. Dimension and loop checks live in validate_model.
ParseResult parse_model(const std::string& text);

// Canonical text form; parse_model(print_model(m)) reproduces m.
std::string print_model(const Model& m);

bool model_equal(const Model& a, const Model& b);

}  // namespace credo
