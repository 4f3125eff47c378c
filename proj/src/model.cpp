#include "credo/model.hpp"

#include "credo/errors.hpp"

namespace credo {

const Signal* Model::find_signal(const std::string& n) const {
    for (const Signal& s : signals) {
        if (s.name == n) return &s;
    }
    return nullptr;
}

const Binding* Model::find_binding(const std::string& n) const {
    for (const Binding& b : bindings) {
        if (b.name == n) return &b;
    }
    return nullptr;
}

Binding* Model::find_binding(const std::string& n) {
    for (Binding& b : bindings) {
        if (b.name == n) return &b;
    }
    return nullptr;
}

const ExternalDecl* Model::find_external(const std::string& n) const {
    for (const ExternalDecl& e : externals) {
        if (e.name == n) return &e;
    }
    return nullptr;
}

Matrix Model::binding_value(const std::string& n) const {
    const Binding* b = find_binding(n);
    if (!b) throw ValidationError("missing binding '" + n + "'");
    if (!b->value) {
        throw ValidationError("binding '" + n + "' is still unresolved (auto)");
    }
    return *b->value;
}

ShapeEnv Model::shape_env() const {
    ShapeEnv env;
    for (const Signal& s : signals) env.vars[s.name] = s.shape();
    for (const ExternalDecl& e : externals) {
        env.fn_arity[e.name] = e.arity;
        env.fn_results[e.name] = {e.result_rows, e.result_cols};
    }
    return env;
}

std::map<std::string, Matrix> Model::constants() const {
    std::map<std::string, Matrix> out;
    for (const Binding& b : bindings) {
        if (b.value) out[b.name] = *b.value;
    }
    return out;
}

double Model::sat_default() const {
    const Binding* b = find_binding("c_sat");
    if (b && b->value && b->value->is_scalar()) return b->value->scalar();
    return 1.0;
}

std::string to_string(const Diagnostic& d) {
    std::string s = "line " + std::to_string(d.line);
    if (!d.field.empty()) s += " (" + d.field + ")";
    return s + ": " + d.message;
}

}  // namespace credo
