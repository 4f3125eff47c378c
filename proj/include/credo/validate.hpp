#pragma once

#include <vector>

#include "credo/model.hpp"

namespace credo {

struct ValidateResult {
    std::vector<Loop> loops;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return diagnostics.empty(); }
};

// Checks port dimensions, acyclicity of the computation graph, plant and
// observer consistency, then pairs each plant with its controller subsystem
// into a Loop (declaration order; deterministic) and attaches observers.
ValidateResult validate_model(const Model& m);

// Output shape of a block given its input signal shapes. Throws
// DimensionError / ValidationError with a message naming the mismatch.
Shape block_output_shape(const Model& m, const Block& b);

}  // namespace credo
