#include "credo/validate.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "credo/errors.hpp"
#include "credo/linalg.hpp"

namespace credo {

namespace {

std::size_t stacked_dim(const Model& m, const std::vector<std::string>& names) {
    std::size_t total = 0;
    for (const std::string& n : names) {
        const Signal* s = m.find_signal(n);
        if (s) total += s->rows;
    }
    return total;
}

}  // namespace

Shape block_output_shape(const Model& m, const Block& b) {
    auto in_shape = [&](std::size_t i) -> Shape {
        const Signal* s = m.find_signal(b.inputs.at(i));
        if (!s) throw ValidationError("block " + b.name + ": unknown input signal");
        return s->shape();
    };
    switch (b.kind) {
        case BlockKind::Gain: {
            if (b.inputs.size() != 1) {
                throw ValidationError("gain " + b.name + " needs exactly one input");
            }
            const Shape in = in_shape(0);
            if (!in.is_column()) {
                throw DimensionError("gain " + b.name + " input must be a column, got " +
                                     in.str());
            }
            if (b.gain_value) {
                if (b.gain_value->is_scalar()) return in;
                if (b.gain_value->cols() != in.rows) {
                    throw DimensionError("gain " + b.name + " matrix " +
                                         b.gain_value->describe() + " against input " +
                                         in.str());
                }
                return {b.gain_value->rows(), 1};
            }
            // unresolved matrix: shape comes from the declared output signal
            const Signal* out = m.find_signal(b.output);
            if (!out) throw ValidationError("gain " + b.name + ": unknown output signal");
            return out->shape();
        }
        case BlockKind::Sum: {
            if (b.inputs.empty()) {
                throw ValidationError("sum " + b.name + " needs at least one input");
            }
            if (!b.sum_signs.empty() && b.sum_signs.size() != b.inputs.size()) {
                throw ValidationError("sum " + b.name + ": signs list length mismatch");
            }
            const Shape s = in_shape(0);
            for (std::size_t i = 1; i < b.inputs.size(); ++i) {
                if (!(in_shape(i) == s)) {
                    throw DimensionError("sum " + b.name + ": input " + b.inputs[i] +
                                         " has shape " + in_shape(i).str() + ", expected " +
                                         s.str());
                }
            }
            return s;
        }
        case BlockKind::Product: {
            if (b.inputs.size() != 2) {
                throw ValidationError("product " + b.name + " needs exactly two inputs");
            }
            Shape a = in_shape(0);
            const Shape c = in_shape(1);
            if (b.product_transpose_first) std::swap(a.rows, a.cols);
            if (a.is_scalar()) return c;
            if (c.is_scalar()) return a;
            if (a.cols != c.rows) {
                throw DimensionError("product " + b.name + ": " + a.str() + " times " +
                                     c.str());
            }
            return {a.rows, c.cols};
        }
        case BlockKind::Saturation: {
            if (b.inputs.size() != 1) {
                throw ValidationError("saturation " + b.name + " needs exactly one input");
            }
            if (!(b.sat_lo < b.sat_hi)) {
                throw ValidationError("saturation " + b.name + ": lo must be < hi");
            }
            return in_shape(0);
        }
        case BlockKind::Trig: {
            if (b.inputs.size() != 1) {
                throw ValidationError("trig " + b.name + " needs exactly one input");
            }
            return in_shape(0);
        }
        case BlockKind::Constant: {
            if (!b.inputs.empty()) {
                throw ValidationError("constant " + b.name + " takes no inputs");
            }
            if (b.const_value) return {b.const_value->rows(), b.const_value->cols()};
            const Signal* out = m.find_signal(b.output);
            if (!out) throw ValidationError("constant " + b.name + ": unknown output signal");
            return out->shape();
        }
        case BlockKind::External: {
            const ExternalDecl* fn = m.find_external(b.external_fn);
            if (!fn) {
                throw ValidationError("block " + b.name + ": unknown external function '" +
                                      b.external_fn + "'");
            }
            if (fn->arity != b.inputs.size()) {
                throw ValidationError("block " + b.name + ": '" + fn->name + "' expects " +
                                      std::to_string(fn->arity) + " inputs");
            }
            return {fn->result_rows, fn->result_cols};
        }
    }
    throw Error("unreachable block kind");
}

ValidateResult validate_model(const Model& m) {
    ValidateResult out;
    auto fail = [&](int line, const std::string& field, const std::string& msg) {
        out.diagnostics.push_back({line, field, msg});
    };

    // ---- block port dimensions -------------------------------------------------
    for (const Block& b : m.blocks) {
        try {
            const Shape got = block_output_shape(m, b);
            const Signal* outsig = m.find_signal(b.output);
            if (outsig && !(got == outsig->shape())) {
                fail(b.line, b.name,
                     "output '" + b.output + "' declared " + outsig->shape().str() +
                         " but block produces " + got.str());
            }
        } catch (const Error& err) {
            fail(b.line, b.name, err.what());
        }
        // gain matrix resolved from bindings must match too
        if (b.kind == BlockKind::Gain && !b.gain_ref.empty() && b.gain_ref != "auto") {
            const Binding* bind = m.find_binding(b.gain_ref);
            if (!bind) {
                fail(b.line, b.name, "unknown binding '" + b.gain_ref + "'");
            } else if (bind->value) {
                const Signal* in = m.find_signal(b.inputs.empty() ? "" : b.inputs[0]);
                const Signal* outsig = m.find_signal(b.output);
                if (in && outsig && !bind->value->is_scalar() &&
                    (bind->value->rows() != outsig->rows || bind->value->cols() != in->rows)) {
                    fail(b.line, b.name,
                         "gain matrix " + bind->value->describe() + " does not map " +
                             in->shape().str() + " to " + outsig->shape().str());
                }
            }
        }
        if (b.kind == BlockKind::Constant && !b.const_ref.empty() && b.const_ref != "auto") {
            const Binding* bind = m.find_binding(b.const_ref);
            if (!bind) fail(b.line, b.name, "unknown binding '" + b.const_ref + "'");
        }
    }

    // ---- acyclicity of the computation graph ------------------------------------
    {
        std::map<std::string, std::size_t> producer;  // signal -> block index
        for (std::size_t i = 0; i < m.blocks.size(); ++i) {
            producer[m.blocks[i].output] = i;
        }
        std::vector<int> state(m.blocks.size(), 0);  // 0 new, 1 visiting, 2 done
        std::vector<std::size_t> stack;
        bool cyclic = false;
        std::function<void(std::size_t)> visit = [&](std::size_t i) {
            if (cyclic || state[i] == 2) return;
            if (state[i] == 1) {
                cyclic = true;
                std::string chain;
                for (std::size_t k : stack) chain += m.blocks[k].name + " -> ";
                fail(m.blocks[i].line, m.blocks[i].name,
                     "computation cycle: " + chain + m.blocks[i].name);
                return;
            }
            state[i] = 1;
            stack.push_back(i);
            for (const std::string& in : m.blocks[i].inputs) {
                auto p = producer.find(in);
                if (p != producer.end()) visit(p->second);
            }
            stack.pop_back();
            state[i] = 2;
        };
        for (std::size_t i = 0; i < m.blocks.size() && !cyclic; ++i) visit(i);
    }

    // ---- temp signal constraints -------------------------------------------------
    for (const Signal& s : m.signals) {
        if (!s.is_temp) continue;
        std::size_t consumers = 0;
        for (const Block& b : m.blocks) {
            consumers += std::count(b.inputs.begin(), b.inputs.end(), s.name);
        }
        if (consumers != 1) {
            fail(s.line, s.name,
                 "temp signal must have exactly one consumer, found " +
                     std::to_string(consumers));
        }
        for (const AnnotationBlock& a : m.annotations) {
            const bool wired =
                std::count(a.watch.begin(), a.watch.end(), s.name) ||
                std::count(a.plant_inputs.begin(), a.plant_inputs.end(), s.name) ||
                std::count(a.plant_outputs.begin(), a.plant_outputs.end(), s.name) ||
                a.state_signal == s.name;
            if (wired) {
                fail(s.line, s.name, "temp signal may not be wired to annotation blocks");
            }
        }
    }

    // ---- annotation blocks ---------------------------------------------------------
    const ShapeEnv shapes = m.shape_env();
    for (const AnnotationBlock& a : m.annotations) {
        switch (a.kind) {
            case AnnotationKind::LinearPlant: {
                const std::size_t n = stacked_dim(m, a.plant_outputs);
                const std::size_t in_dim = stacked_dim(m, a.plant_inputs);
                if (a.plant_outputs.empty() || a.plant_inputs.empty()) {
                    fail(a.line, a.name, "linear plant needs inputs and outputs wiring");
                    break;
                }
                if (a.a && (a.a->rows() != n || a.a->cols() != n)) {
                    fail(a.line, a.name,
                         "A is " + a.a->describe() + " but the state dimension is " +
                             std::to_string(n));
                }
                if (a.b && (a.b->rows() != n || a.b->cols() != in_dim)) {
                    fail(a.line, a.name,
                         "B is " + a.b->describe() + " but must map " +
                             std::to_string(in_dim) + " inputs to " + std::to_string(n) +
                             " states");
                }
                if (a.c && (a.c->cols() != n)) {
                    fail(a.line, a.name, "C is " + a.c->describe() + ", expected columns " +
                                             std::to_string(n));
                }
                if (a.d && (a.d->cols() != in_dim)) {
                    fail(a.line, a.name, "D is " + a.d->describe() + ", expected columns " +
                                             std::to_string(in_dim));
                }
                if (!a.auto_linear && (!a.a || !a.b)) {
                    fail(a.line, a.name, "linear plant needs A and B (or auto)");
                }
                break;
            }
            case AnnotationKind::GeneralPlant: {
                const Signal* st = m.find_signal(a.state_signal);
                if (!st) {
                    fail(a.line, a.name, "general plant needs a state signal");
                    break;
                }
                if (!a.update) {
                    fail(a.line, a.name, "general plant needs an update expression");
                    break;
                }
                try {
                    const Shape s = shape_of(a.update, shapes);
                    if (!(s == st->shape())) {
                        fail(a.line, a.name,
                             "update produces " + s.str() + " but state '" + st->name +
                                 "' is " + st->shape().str());
                    }
                } catch (const Error& err) {
                    fail(a.line, a.name, err.what());
                }
                std::set<std::string> allowed(a.plant_inputs.begin(), a.plant_inputs.end());
                allowed.insert(a.state_signal);
                for (const std::string& v : free_vars(a.update)) {
                    if (!allowed.count(v)) {
                        fail(a.line, a.name,
                             "update references '" + v + "' outside states/inputs");
                    }
                }
                break;
            }
            case AnnotationKind::EllipsoidObserver: {
                const std::size_t n = stacked_dim(m, a.watch);
                if (a.watch.empty()) {
                    fail(a.line, a.name, "observer watches no signals");
                    break;
                }
                if (a.ellipsoid_shape) {
                    if (a.ellipsoid_shape->rows() != n || a.ellipsoid_shape->cols() != n) {
                        fail(a.line, a.name,
                             "P is " + a.ellipsoid_shape->describe() +
                                 " but watched dimension is " + std::to_string(n));
                    } else {
                        try {
                            if (!is_positive_definite(*a.ellipsoid_shape)) {
                                fail(a.line, a.name, "P is not positive definite");
                            }
                        } catch (const Error& err) {
                            fail(a.line, a.name, err.what());
                        }
                    }
                } else if (!a.auto_ellipsoid) {
                    fail(a.line, a.name, "ellipsoid observer needs P (or auto)");
                }
                break;
            }
            case AnnotationKind::GeneralObserver: {
                if (a.observer_pred.conjuncts.empty()) {
                    fail(a.line, a.name, "general observer needs a predicate");
                    break;
                }
                std::set<std::string> allowed(a.watch.begin(), a.watch.end());
                for (const std::string& v : free_vars(a.observer_pred)) {
                    if (!allowed.count(v)) {
                        fail(a.line, a.name,
                             "predicate references '" + v + "' outside watched signals");
                    }
                }
                for (const Comparison& c : a.observer_pred.conjuncts) {
                    try {
                        if (!shape_of(c.lhs, shapes).is_scalar() ||
                            !shape_of(c.rhs, shapes).is_scalar()) {
                            fail(a.line, a.name, "predicate sides must be scalar");
                        }
                    } catch (const Error& err) {
                        fail(a.line, a.name, err.what());
                    }
                }
                break;
            }
        }
    }

    if (!out.diagnostics.empty()) return out;

    // ---- loop extraction (declaration order) ---------------------------------------
    for (std::size_t ai = 0; ai < m.annotations.size(); ++ai) {
        const AnnotationBlock& a = m.annotations[ai];
        if (a.kind != AnnotationKind::LinearPlant && a.kind != AnnotationKind::GeneralPlant) {
            continue;
        }
        Loop loop;
        loop.subsystem = a.subsystem;
        loop.plant = ai;
        if (a.subsystem.empty()) {
            fail(a.line, a.name, "plant needs a subsystem label to form a loop");
            continue;
        }
        for (std::size_t bi = 0; bi < m.blocks.size(); ++bi) {
            if (m.blocks[bi].subsystem == a.subsystem) {
                loop.controller_blocks.push_back(bi);
            }
        }
        if (loop.controller_blocks.empty()) {
            fail(a.line, a.name, "no controller blocks in subsystem '" + a.subsystem + "'");
            continue;
        }
        // closed loop: every plant input produced inside the loop, and some
        // plant output consumed inside the loop
        std::set<std::string> produced;
        std::set<std::string> consumed;
        for (std::size_t bi : loop.controller_blocks) {
            produced.insert(m.blocks[bi].output);
            for (const std::string& in : m.blocks[bi].inputs) consumed.insert(in);
        }
        for (const std::string& pin : a.plant_inputs) {
            if (a.kind == AnnotationKind::LinearPlant && !produced.count(pin)) {
                fail(a.line, a.name,
                     "plant input '" + pin + "' is not produced by subsystem '" +
                         a.subsystem + "'");
            }
        }
        std::vector<std::string> plant_outputs = a.plant_outputs;
        if (a.kind == AnnotationKind::GeneralPlant) plant_outputs.push_back(a.state_signal);
        const bool closes = std::any_of(plant_outputs.begin(), plant_outputs.end(),
                                        [&](const std::string& s) { return consumed.count(s); });
        if (!closes) {
            fail(a.line, a.name, "no plant output feeds subsystem '" + a.subsystem + "'");
        }
        out.loops.push_back(std::move(loop));
    }

    // ---- observer attachment ---------------------------------------------------------
    for (std::size_t ai = 0; ai < m.annotations.size(); ++ai) {
        const AnnotationBlock& a = m.annotations[ai];
        if (a.kind != AnnotationKind::EllipsoidObserver &&
            a.kind != AnnotationKind::GeneralObserver) {
            continue;
        }
        for (Loop& loop : out.loops) {
            const AnnotationBlock& plant = m.annotations[loop.plant];
            std::set<std::string> loop_signals(plant.plant_outputs.begin(),
                                               plant.plant_outputs.end());
            if (!plant.state_signal.empty()) loop_signals.insert(plant.state_signal);
            const bool matches = std::any_of(a.watch.begin(), a.watch.end(),
                                             [&](const std::string& w) {
                                                 return loop_signals.count(w) > 0;
                                             });
            if (matches) {
                loop.observers.push_back(ai);
                if (a.kind == AnnotationKind::GeneralObserver) {
                    loop.invariant = a.observer_pred;
                    loop.invariant_known = true;
                } else if (a.ellipsoid_shape) {
                    std::vector<Expr> parts;
                    for (const std::string& w : a.watch) parts.push_back(var(w));
                    loop.invariant =
                        pred_le(quad(*a.ellipsoid_shape, vcat(parts), a.name), cst(1.0));
                    loop.invariant_known = true;
                }
                break;
            }
        }
    }

    if (!out.diagnostics.empty()) out.loops.clear();
    return out;
}

}  // namespace credo
