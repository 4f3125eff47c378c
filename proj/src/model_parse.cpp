#include "credo/model_parse.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "credo/errors.hpp"
#include "credo/expr_parse.hpp"

namespace credo {

namespace {

class ModelParser {
public:
    explicit ModelParser(const std::string& text) : lex_(text) {}

    Model run() {
        lex_.expect("model", "at start of file");
        model_.name = lex_.expect_ident("as model name").text;
        section("bindings", [&] { binding_entry(); });
        section("signals", [&] { signal_entry(); });
        section("externals", [&] { external_entry(); });
        section("blocks", [&] { block_entry(); });
        section("plants", [&] { plant_entry(); });
        section("observers", [&] { observer_entry(); });
        if (!lex_.at_end()) {
            lex_.fail("unknown section '" + lex_.peek().text + "'");
        }
        structural_checks();
        return model_;
    }

private:
    void section(const std::string& keyword, const std::function<void()>& entry) {
        if (!lex_.accept(keyword)) return;
        lex_.expect("{", "to open section '" + keyword + "'");
        while (!lex_.accept("}")) {
            if (lex_.at_end()) lex_.fail("unterminated section '" + keyword + "'");
            entry();
        }
    }

    // ---- bindings: NAME = number | vector | matrix | auto ----------------------

    void binding_entry() {
        Binding b;
        Token name = lex_.expect_ident("as binding name");
        b.name = name.text;
        b.line = name.line;
        lex_.expect("=", "after binding name");
        if (lex_.accept("auto")) {
            b.is_auto = true;
        } else {
            b.value = matrix_literal("binding '" + b.name + "'");
        }
        if (model_.find_binding(b.name)) {
            lex_.fail_at(name, "duplicate binding '" + b.name + "'");
        }
        model_.bindings.push_back(std::move(b));
    }

    Matrix matrix_literal(const std::string& what) {
        if (lex_.peek().kind == Token::Number ||
            (lex_.peek().text == "-" && lex_.peek(1).kind == Token::Number)) {
            return Matrix{{lex_.expect_number("in " + what).number}};
        }
        if (lex_.peek().text == "[") {
            ParserSymbols none;
            const Expr e = parse_expression(lex_, none);
            if (e->kind != ExprKind::Const) {
                lex_.fail("expected a numeric literal in " + what);
            }
            return e->value;
        }
        lex_.fail("expected number, vector or matrix in " + what);
    }

    // ---- signals: NAME : scalar | vec N | mat R C [input] [output] [temp] ------

    void signal_entry() {
        Signal s;
        Token name = lex_.expect_ident("as signal name");
        s.name = name.text;
        s.line = name.line;
        lex_.expect(":", "after signal name");
        shape_spec(s.rows, s.cols);
        while (true) {
            if (lex_.accept("input")) {
                s.is_input = true;
            } else if (lex_.accept("output")) {
                s.is_output = true;
            } else if (lex_.accept("temp")) {
                s.is_temp = true;
            } else {
                break;
            }
        }
        if (s.is_temp && (s.is_input || s.is_output)) {
            lex_.fail_at(name, "temp signal '" + s.name + "' cannot be input or output");
        }
        if (model_.find_signal(s.name)) {
            lex_.fail_at(name, "duplicate signal '" + s.name + "'");
        }
        model_.signals.push_back(std::move(s));
    }

    void shape_spec(std::size_t& rows, std::size_t& cols) {
        if (lex_.accept("scalar")) {
            rows = cols = 1;
            return;
        }
        if (lex_.accept("vec")) {
            rows = static_cast<std::size_t>(lex_.expect_number("as vector length").number);
            cols = 1;
            return;
        }
        if (lex_.accept("mat")) {
            rows = static_cast<std::size_t>(lex_.expect_number("as row count").number);
            cols = static_cast<std::size_t>(lex_.expect_number("as column count").number);
            return;
        }
        lex_.fail("expected 'scalar', 'vec N' or 'mat R C'");
    }

    // ---- externals: NAME : arity N -> shape -------------------------------------

    void external_entry() {
        ExternalDecl e;
        Token name = lex_.expect_ident("as external function name");
        e.name = name.text;
        e.line = name.line;
        lex_.expect(":", "after external name");
        lex_.expect("arity", "in external declaration");
        e.arity = static_cast<std::size_t>(lex_.expect_number("as arity").number);
        lex_.expect("->", "before external result shape");
        shape_spec(e.result_rows, e.result_cols);
        if (model_.find_external(e.name)) {
            lex_.fail_at(name, "duplicate external '" + e.name + "'");
        }
        model_.externals.push_back(std::move(e));
    }

    // ---- blocks ------------------------------------------------------------------

    void block_entry() {
        static const std::map<std::string, BlockKind> kinds = {
            {"gain", BlockKind::Gain},           {"sum", BlockKind::Sum},
            {"product", BlockKind::Product},     {"saturation", BlockKind::Saturation},
            {"trig", BlockKind::Trig},           {"constant", BlockKind::Constant},
            {"external", BlockKind::External},
        };
        Token kind_tok = lex_.expect_ident("as block kind");
        auto k = kinds.find(kind_tok.text);
        if (k == kinds.end()) {
            lex_.fail_at(kind_tok, "unknown block kind '" + kind_tok.text + "'");
        }
        Block b;
        b.kind = k->second;
        b.line = kind_tok.line;
        Token name = lex_.expect_ident("as block name");
        b.name = name.text;
        lex_.expect("{", "to open block '" + b.name + "'");
        while (!lex_.accept("}")) {
            if (lex_.at_end()) lex_.fail("unterminated block '" + b.name + "'");
            block_property(b);
        }
        for (const Block& other : model_.blocks) {
            if (other.name == b.name) {
                lex_.fail_at(name, "duplicate block '" + b.name + "'");
            }
        }
        model_.blocks.push_back(std::move(b));
    }

    void block_property(Block& b) {
        Token key = lex_.expect_ident("as block property");
        if (key.text == "subsystem") {
            b.subsystem = lex_.expect_ident("as subsystem label").text;
        } else if (key.text == "in") {
            b.inputs = ident_list();
        } else if (key.text == "out") {
            b.output = lex_.expect_ident("as output signal").text;
        } else if (key.text == "matrix") {
            matrix_ref(b.gain_ref, b.gain_value);
        } else if (key.text == "value") {
            matrix_ref(b.const_ref, b.const_value);
        } else if (key.text == "signs") {
            b.sum_signs.clear();
            while (lex_.peek().text == "+" || lex_.peek().text == "-") {
                b.sum_signs.push_back(lex_.next().text == "+" ? 1 : -1);
            }
            if (b.sum_signs.empty()) lex_.fail_at(key, "empty signs list");
        } else if (key.text == "transpose_first") {
            b.product_transpose_first = true;
        } else if (key.text == "lo") {
            b.sat_lo = scalar_ref("lo");
        } else if (key.text == "hi") {
            b.sat_hi = scalar_ref("hi");
        } else if (key.text == "fn") {
            const Token fn = lex_.expect_ident("as function reference");
            if (b.kind == BlockKind::Trig) {
                if (fn.text == "sin") {
                    b.trig_is_sin = true;
                } else if (fn.text == "cos") {
                    b.trig_is_sin = false;
                } else {
                    lex_.fail_at(fn, "trig fn must be sin or cos");
                }
            } else {
                b.external_fn = fn.text;
            }
        } else {
            lex_.fail_at(key, "unknown block property '" + key.text + "'");
        }
    }

    // matrix reference: auto | binding name | literal
    void matrix_ref(std::string& ref, std::optional<Matrix>& value) {
        if (lex_.accept("auto")) {
            ref = "auto";
            return;
        }
        if (lex_.peek().kind == Token::Ident) {
            ref = lex_.next().text;
            return;
        }
        value = matrix_literal("matrix reference");
    }

    // scalar reference: [-]number | [-]binding name (resolved immediately)
    double scalar_ref(const std::string& what) {
        double sign = 1.0;
        if (lex_.peek().text == "-" && lex_.peek(1).kind == Token::Ident) {
            lex_.next();
            sign = -1.0;
        }
        if (lex_.peek().kind == Token::Ident) {
            const Token id = lex_.next();
            const Binding* bind = model_.find_binding(id.text);
            if (!bind || !bind->value || !bind->value->is_scalar()) {
                lex_.fail_at(id, "'" + id.text + "' is not a scalar binding (" + what + ")");
            }
            return sign * bind->value->scalar();
        }
        return lex_.expect_number("as " + what).number;
    }

    std::vector<std::string> ident_list() {
        std::vector<std::string> out;
        do {
            out.push_back(lex_.expect_ident("in signal list").text);
        } while (lex_.accept(","));
        return out;
    }

    // ---- plants ---------------------------------------------------------------

    void plant_entry() {
        Token kind = lex_.expect_ident("as plant kind");
        AnnotationBlock p;
        p.line = kind.line;
        if (kind.text == "linear") {
            p.kind = AnnotationKind::LinearPlant;
        } else if (kind.text == "general") {
            p.kind = AnnotationKind::GeneralPlant;
        } else {
            lex_.fail_at(kind, "unknown plant kind '" + kind.text + "'");
        }
        p.name = lex_.expect_ident("as plant name").text;
        lex_.expect("{", "to open plant '" + p.name + "'");
        while (!lex_.accept("}")) {
            if (lex_.at_end()) lex_.fail("unterminated plant '" + p.name + "'");
            plant_property(p);
        }
        model_.annotations.push_back(std::move(p));
    }

    void plant_property(AnnotationBlock& p) {
        Token key = lex_.expect_ident("as plant property");
        auto plant_matrix = [&](std::optional<Matrix>& slot) {
            std::string ref;
            std::optional<Matrix> value;
            matrix_ref(ref, value);
            if (ref == "auto") {
                p.auto_linear = true;
            } else if (!ref.empty()) {
                const Binding* bind = model_.find_binding(ref);
                if (!bind) lex_.fail_at(key, "unknown binding '" + ref + "'");
                if (bind->is_auto) {
                    p.auto_linear = true;
                } else {
                    slot = bind->value;
                }
            } else {
                slot = value;
            }
        };
        if (key.text == "subsystem") {
            p.subsystem = lex_.expect_ident("as subsystem label").text;
        } else if (key.text == "inputs") {
            p.plant_inputs = ident_list();
        } else if (key.text == "outputs") {
            p.plant_outputs = ident_list();
        } else if (key.text == "A") {
            plant_matrix(p.a);
        } else if (key.text == "B") {
            plant_matrix(p.b);
        } else if (key.text == "C") {
            plant_matrix(p.c);
        } else if (key.text == "D") {
            plant_matrix(p.d);
        } else if (key.text == "state") {
            p.state_signal = lex_.expect_ident("as plant state signal").text;
        } else if (key.text == "update") {
            p.update = parse_expression(lex_, expr_symbols());
        } else {
            lex_.fail_at(key, "unknown plant property '" + key.text + "'");
        }
    }

    // ---- observers --------------------------------------------------------------

    void observer_entry() {
        Token kind = lex_.expect_ident("as observer kind");
        AnnotationBlock o;
        o.line = kind.line;
        if (kind.text == "general") {
            o.kind = AnnotationKind::GeneralObserver;
        } else if (kind.text == "ellipsoid") {
            o.kind = AnnotationKind::EllipsoidObserver;
        } else {
            lex_.fail_at(kind, "unknown observer kind '" + kind.text + "'");
        }
        o.name = lex_.expect_ident("as observer name").text;
        lex_.expect("{", "to open observer '" + o.name + "'");
        while (!lex_.accept("}")) {
            if (lex_.at_end()) lex_.fail("unterminated observer '" + o.name + "'");
            Token key = lex_.expect_ident("as observer property");
            if (key.text == "watch") {
                o.watch = ident_list();
            } else if (key.text == "pred") {
                o.observer_pred = parse_predicate(lex_, expr_symbols());
            } else if (key.text == "P") {
                std::string ref;
                std::optional<Matrix> value;
                matrix_ref(ref, value);
                if (ref == "auto") {
                    o.auto_ellipsoid = true;
                } else if (!ref.empty()) {
                    const Binding* bind = model_.find_binding(ref);
                    if (!bind) lex_.fail_at(key, "unknown binding '" + ref + "'");
                    if (bind->is_auto) {
                        o.auto_ellipsoid = true;
                    } else {
                        o.ellipsoid_shape = bind->value;
                    }
                } else {
                    o.ellipsoid_shape = value;
                }
            } else {
                lex_.fail_at(key, "unknown observer property '" + key.text + "'");
            }
        }
        model_.annotations.push_back(std::move(o));
    }

    ParserSymbols expr_symbols() {
        ParserSymbols sym;
        sym.shapes = model_.shape_env();
        sym.constants = model_.constants();
        const double c = model_.sat_default();
        sym.sat_lo = -c;
        sym.sat_hi = c;
        return sym;
    }

    // ---- structural checks (single producer, declared references) ---------------

    void structural_checks() {
        std::map<std::string, int> producers;
        for (const Signal& s : model_.signals) {
            producers[s.name] = s.is_input ? 1 : 0;
        }
        auto check_signal = [&](const std::string& n, int line, const std::string& where) {
            if (!model_.find_signal(n)) {
                throw ParseError("line " + std::to_string(line) + ": " + where +
                                 " references undeclared signal '" + n + "'");
            }
        };
        for (const Block& b : model_.blocks) {
            for (const std::string& in : b.inputs) check_signal(in, b.line, "block " + b.name);
            check_signal(b.output, b.line, "block " + b.name);
            if (++producers[b.output] > 1) {
                throw ParseError("line " + std::to_string(b.line) + ": signal '" + b.output +
                                 "' has more than one producer");
            }
        }
        for (const AnnotationBlock& a : model_.annotations) {
            for (const std::string& s : a.plant_inputs) {
                check_signal(s, a.line, "plant " + a.name);
            }
            for (const std::string& s : a.plant_outputs) {
                check_signal(s, a.line, "plant " + a.name);
            }
            if (!a.state_signal.empty()) check_signal(a.state_signal, a.line, "plant " + a.name);
            for (const std::string& s : a.watch) {
                check_signal(s, a.line, "observer " + a.name);
            }
        }
        for (const auto& [name, count] : producers) {
            if (count == 0) {
                // consumed-but-never-produced is caught here by name
                for (const Block& b : model_.blocks) {
                    for (const std::string& in : b.inputs) {
                        if (in == name) {
                            throw ParseError("signal '" + name +
                                             "' is consumed but never produced");
                        }
                    }
                }
            }
        }
        // record division guards for non-constant denominators
        ShapeEnv env = model_.shape_env();
        for (const AnnotationBlock& a : model_.annotations) {
            if (a.update) record_division_guards(a.update, a.name);
            for (const Comparison& c : a.observer_pred.conjuncts) {
                record_division_guards(c.lhs, a.name);
                record_division_guards(c.rhs, a.name);
            }
        }
    }

    void record_division_guards(const Expr& e, const std::string& where) {
        if (e->kind == ExprKind::Div) {
            const Expr& den = e->args[1];
            const bool const_nonzero =
                den->kind == ExprKind::Const && den->value.is_scalar() &&
                den->value.scalar() != 0.0;
            if (!const_nonzero) {
                model_.division_guards.push_back(where + ": " + to_string(den) + " != 0");
            }
        }
        for (const Expr& a : e->args) record_division_guards(a, where);
    }

    Lexer lex_;
    Model model_;
};

}  // namespace

ParseResult parse_model(const std::string& text) {
    ParseResult out;
    try {
        out.model = ModelParser(text).run();
    } catch (const ParseError& err) {
        Diagnostic d;
        const std::string msg = err.what();
        if (msg.rfind("line ", 0) == 0) {
            d.line = std::atoi(msg.c_str() + 5);
        }
        d.message = msg;
        out.diagnostics.push_back(std::move(d));
    }
    return out;
}

// ---- canonical printing --------------------------------------------------------

namespace {

void print_matrix_literal(std::ostringstream& os, const Matrix& m) {
    if (m.is_scalar()) {
        os << format_double(m.scalar());
        return;
    }
    if (m.cols() == 1) {
        os << "[";
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i) os << ", ";
            os << format_double(m[i]);
        }
        os << "]";
        return;
    }
    os << "[";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (i) os << ", ";
        os << "[";
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) os << ", ";
            os << format_double(m(i, j));
        }
        os << "]";
    }
    os << "]";
}

void print_shape(std::ostringstream& os, std::size_t rows, std::size_t cols) {
    if (rows == 1 && cols == 1) {
        os << "scalar";
    } else if (cols == 1) {
        os << "vec " << rows;
    } else {
        os << "mat " << rows << " " << cols;
    }
}

void print_matrix_ref(std::ostringstream& os, const std::string& ref,
                      const std::optional<Matrix>& value) {
    if (ref == "auto") {
        os << "auto";
    } else if (!ref.empty()) {
        os << ref;
    } else if (value) {
        print_matrix_literal(os, *value);
    }
}

}  // namespace

std::string print_model(const Model& m) {
    std::ostringstream os;
    os << "model " << m.name << "\n\n";

    if (!m.bindings.empty()) {
        os << "bindings {\n";
        for (const Binding& b : m.bindings) {
            os << "  " << b.name << " = ";
            if (b.is_auto) {
                os << "auto";
            } else {
                print_matrix_literal(os, *b.value);
            }
            os << "\n";
        }
        os << "}\n\n";
    }
    if (!m.signals.empty()) {
        os << "signals {\n";
        for (const Signal& s : m.signals) {
            os << "  " << s.name << " : ";
            print_shape(os, s.rows, s.cols);
            if (s.is_input) os << " input";
            if (s.is_output) os << " output";
            if (s.is_temp) os << " temp";
            os << "\n";
        }
        os << "}\n\n";
    }
    if (!m.externals.empty()) {
        os << "externals {\n";
        for (const ExternalDecl& e : m.externals) {
            os << "  " << e.name << " : arity " << e.arity << " -> ";
            print_shape(os, e.result_rows, e.result_cols);
            os << "\n";
        }
        os << "}\n\n";
    }
    if (!m.blocks.empty()) {
        os << "blocks {\n";
        for (const Block& b : m.blocks) {
            const char* kind = nullptr;
            switch (b.kind) {
                case BlockKind::Gain: kind = "gain"; break;
                case BlockKind::Sum: kind = "sum"; break;
                case BlockKind::Product: kind = "product"; break;
                case BlockKind::Saturation: kind = "saturation"; break;
                case BlockKind::Trig: kind = "trig"; break;
                case BlockKind::Constant: kind = "constant"; break;
                case BlockKind::External: kind = "external"; break;
            }
            os << "  " << kind << " " << b.name << " {";
            if (!b.subsystem.empty()) os << " subsystem " << b.subsystem;
            if (b.kind == BlockKind::Trig) os << " fn " << (b.trig_is_sin ? "sin" : "cos");
            if (b.kind == BlockKind::External) os << " fn " << b.external_fn;
            if (!b.inputs.empty()) {
                os << " in ";
                for (std::size_t i = 0; i < b.inputs.size(); ++i) {
                    if (i) os << ", ";
                    os << b.inputs[i];
                }
            }
            if (!b.output.empty()) os << " out " << b.output;
            if (b.kind == BlockKind::Gain) {
                os << " matrix ";
                print_matrix_ref(os, b.gain_ref, b.gain_value);
            }
            if (b.kind == BlockKind::Constant) {
                os << " value ";
                print_matrix_ref(os, b.const_ref, b.const_value);
            }
            if (!b.sum_signs.empty()) {
                os << " signs";
                for (int s : b.sum_signs) os << " " << (s > 0 ? "+" : "-");
            }
            if (b.product_transpose_first) os << " transpose_first";
            if (b.kind == BlockKind::Saturation) {
                os << " lo " << format_double(b.sat_lo) << " hi " << format_double(b.sat_hi);
            }
            os << " }\n";
        }
        os << "}\n\n";
    }
    const bool has_plants =
        std::any_of(m.annotations.begin(), m.annotations.end(), [](const AnnotationBlock& a) {
            return a.kind == AnnotationKind::LinearPlant ||
                   a.kind == AnnotationKind::GeneralPlant;
        });
    if (has_plants) {
        os << "plants {\n";
        for (const AnnotationBlock& a : m.annotations) {
            if (a.kind == AnnotationKind::LinearPlant) {
                os << "  linear " << a.name << " {";
                if (!a.subsystem.empty()) os << " subsystem " << a.subsystem;
                os << " inputs ";
                for (std::size_t i = 0; i < a.plant_inputs.size(); ++i) {
                    if (i) os << ", ";
                    os << a.plant_inputs[i];
                }
                os << " outputs ";
                for (std::size_t i = 0; i < a.plant_outputs.size(); ++i) {
                    if (i) os << ", ";
                    os << a.plant_outputs[i];
                }
                if (a.auto_linear) {
                    os << " A auto B auto";
                } else {
                    if (a.a) {
                        os << " A ";
                        print_matrix_literal(os, *a.a);
                    }
                    if (a.b) {
                        os << " B ";
                        print_matrix_literal(os, *a.b);
                    }
                }
                if (a.c) {
                    os << " C ";
                    print_matrix_literal(os, *a.c);
                }
                if (a.d) {
                    os << " D ";
                    print_matrix_literal(os, *a.d);
                }
                os << " }\n";
            } else if (a.kind == AnnotationKind::GeneralPlant) {
                os << "  general " << a.name << " {";
                if (!a.subsystem.empty()) os << " subsystem " << a.subsystem;
                os << " state " << a.state_signal;
                if (!a.plant_inputs.empty()) {
                    os << " inputs ";
                    for (std::size_t i = 0; i < a.plant_inputs.size(); ++i) {
                        if (i) os << ", ";
                        os << a.plant_inputs[i];
                    }
                }
                os << " update " << to_string(a.update) << " }\n";
            }
        }
        os << "}\n\n";
    }
    const bool has_observers =
        std::any_of(m.annotations.begin(), m.annotations.end(), [](const AnnotationBlock& a) {
            return a.kind == AnnotationKind::EllipsoidObserver ||
                   a.kind == AnnotationKind::GeneralObserver;
        });
    if (has_observers) {
        os << "observers {\n";
        for (const AnnotationBlock& a : m.annotations) {
            if (a.kind == AnnotationKind::GeneralObserver) {
                os << "  general " << a.name << " { watch ";
                for (std::size_t i = 0; i < a.watch.size(); ++i) {
                    if (i) os << ", ";
                    os << a.watch[i];
                }
                os << " pred " << to_string(a.observer_pred) << " }\n";
            } else if (a.kind == AnnotationKind::EllipsoidObserver) {
                os << "  ellipsoid " << a.name << " { watch ";
                for (std::size_t i = 0; i < a.watch.size(); ++i) {
                    if (i) os << ", ";
                    os << a.watch[i];
                }
                os << " P ";
                if (a.auto_ellipsoid) {
                    os << "auto";
                } else if (a.ellipsoid_shape) {
                    print_matrix_literal(os, *a.ellipsoid_shape);
                }
                os << " }\n";
            }
        }
        os << "}\n";
    }
    return os.str();
}

namespace {

bool opt_matrix_equal(const std::optional<Matrix>& a, const std::optional<Matrix>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || *a == *b;
}

bool expr_equal_opt(const Expr& a, const Expr& b) {
    if (static_cast<bool>(a) != static_cast<bool>(b)) return false;
    return !a || struct_eq(a, b);
}

}  // namespace

bool model_equal(const Model& a, const Model& b) {
    if (a.name != b.name || a.signals.size() != b.signals.size() ||
        a.blocks.size() != b.blocks.size() || a.annotations.size() != b.annotations.size() ||
        a.externals.size() != b.externals.size() || a.bindings.size() != b.bindings.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.signals.size(); ++i) {
        const Signal &x = a.signals[i], &y = b.signals[i];
        if (x.name != y.name || x.rows != y.rows || x.cols != y.cols ||
            x.is_input != y.is_input || x.is_output != y.is_output || x.is_temp != y.is_temp) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        const Block &x = a.blocks[i], &y = b.blocks[i];
        if (x.name != y.name || x.kind != y.kind || x.inputs != y.inputs ||
            x.output != y.output || x.subsystem != y.subsystem || x.gain_ref != y.gain_ref ||
            !opt_matrix_equal(x.gain_value, y.gain_value) || x.sum_signs != y.sum_signs ||
            x.product_transpose_first != y.product_transpose_first || x.sat_lo != y.sat_lo ||
            x.sat_hi != y.sat_hi || x.trig_is_sin != y.trig_is_sin ||
            x.const_ref != y.const_ref || !opt_matrix_equal(x.const_value, y.const_value) ||
            x.external_fn != y.external_fn) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.annotations.size(); ++i) {
        const AnnotationBlock &x = a.annotations[i], &y = b.annotations[i];
        if (x.name != y.name || x.kind != y.kind || x.subsystem != y.subsystem ||
            !opt_matrix_equal(x.a, y.a) || !opt_matrix_equal(x.b, y.b) ||
            !opt_matrix_equal(x.c, y.c) || !opt_matrix_equal(x.d, y.d) ||
            x.auto_linear != y.auto_linear || x.plant_inputs != y.plant_inputs ||
            x.plant_outputs != y.plant_outputs || x.state_signal != y.state_signal ||
            !expr_equal_opt(x.update, y.update) || x.watch != y.watch ||
            !opt_matrix_equal(x.ellipsoid_shape, y.ellipsoid_shape) ||
            x.auto_ellipsoid != y.auto_ellipsoid ||
            !struct_eq(x.observer_pred, y.observer_pred)) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.externals.size(); ++i) {
        const ExternalDecl &x = a.externals[i], &y = b.externals[i];
        if (x.name != y.name || x.arity != y.arity || x.result_rows != y.result_rows ||
            x.result_cols != y.result_cols) {
            return false;
        }
    }
    for (std::size_t i = 0; i < a.bindings.size(); ++i) {
        const Binding &x = a.bindings[i], &y = b.bindings[i];
        if (x.name != y.name || x.is_auto != y.is_auto || !opt_matrix_equal(x.value, y.value)) {
            return false;
        }
    }
    return true;
}

}  // namespace credo
