#include "credo/expr_parse.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

#include "credo/errors.hpp"

namespace credo {

// ---- lexer -------------------------------------------------------------------

Lexer::Lexer(const std::string& text) {
    int line = 1, col = 1;
    std::size_t i = 0;
    auto bump = [&](char c) {
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    };
    while (i < text.size()) {
        const char c = text[i];
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') bump(text[i++]);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            bump(c);
            ++i;
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
                ++j;
            }
            t.kind = Token::Ident;
            t.text = text.substr(i, j - i);
            while (i < j) bump(text[i++]);
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '.' && i + 1 < text.size() &&
                    std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
            char* endp = nullptr;
            t.kind = Token::Number;
            t.number = std::strtod(text.c_str() + i, &endp);
            const std::size_t j = endp - text.c_str();
            t.text = text.substr(i, j - i);
            while (i < j) bump(text[i++]);
        } else {
            t.kind = Token::Punct;
            // two-character operators first
            static const char* two[] = {"<=", ">=", "&&", "->"};
            bool matched = false;
            for (const char* op : two) {
                if (text.compare(i, 2, op) == 0) {
                    t.text = op;
                    bump(text[i++]);
                    bump(text[i++]);
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                t.text = std::string(1, c);
                bump(text[i++]);
            }
        }
        tokens_.push_back(std::move(t));
    }
    Token end;
    end.kind = Token::End;
    end.line = line;
    end.col = col;
    tokens_.push_back(end);
}

const Token& Lexer::peek(std::size_t ahead) const {
    const std::size_t k = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[k];
}

Token Lexer::next() {
    Token t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
}

bool Lexer::accept(const std::string& punct_or_ident) {
    if (peek().kind != Token::End && peek().text == punct_or_ident) {
        next();
        return true;
    }
    return false;
}

Token Lexer::expect(const std::string& punct_or_ident, const std::string& context) {
    if (peek().text != punct_or_ident || peek().kind == Token::End) {
        fail_at(peek(), "expected '" + punct_or_ident + "' " + context + ", got '" +
                            (peek().kind == Token::End ? "<end>" : peek().text) + "'");
    }
    return next();
}

Token Lexer::expect_ident(const std::string& context) {
    if (peek().kind != Token::Ident) {
        fail_at(peek(), "expected identifier " + context);
    }
    return next();
}

Token Lexer::expect_number(const std::string& context) {
    if (peek().kind == Token::Punct && peek().text == "-" && peek(1).kind == Token::Number) {
        next();
        Token t = next();
        t.number = -t.number;
        t.text = "-" + t.text;
        return t;
    }
    if (peek().kind != Token::Number) {
        fail_at(peek(), "expected number " + context);
    }
    return next();
}

void Lexer::fail(const std::string& msg) const { fail_at(peek(), msg); }

void Lexer::fail_at(const Token& t, const std::string& msg) const {
    std::ostringstream os;
    os << "line " << t.line << ", col " << t.col << ": " << msg;
    throw ParseError(os.str());
}

// ---- expression parser ---------------------------------------------------------

namespace {

// scalar numeric literal, possibly negated
bool scalar_literal(const Expr& e, double& out) {
    if (e->kind == ExprKind::Const && e->value.is_scalar() && e->name.empty()) {
        out = e->value.scalar();
        return true;
    }
    if (e->kind == ExprKind::Neg && e->args[0]->kind == ExprKind::Const &&
        e->args[0]->value.is_scalar() && e->args[0]->name.empty()) {
        out = -e->args[0]->value.scalar();
        return true;
    }
    return false;
}

class ExprParser {
public:
    ExprParser(Lexer& lex, const ParserSymbols& sym) : lex_(lex), sym_(sym) {}

    Expr expression() {
        Expr e = term();
        while (true) {
            if (lex_.accept("+")) {
                e = normalize(add(e, term()));
            } else if (lex_.accept("-")) {
                e = normalize(sub(e, term()));
            } else {
                return e;
            }
        }
    }

    Predicate predicate() {
        Predicate p = comparison();
        while (lex_.accept("&&")) {
            p = pred_and(std::move(p), comparison());
        }
        return p;
    }

private:
    Predicate comparison() {
        Expr lhs = expression();
        if (lex_.accept("<=")) {
            return pred_le(std::move(lhs), expression());
        }
        if (lex_.accept(">=")) {
            return pred_le(expression(), std::move(lhs));
        }
        lex_.fail("expected '<=' or '>=' in predicate");
    }

    Expr term() {
        Expr e = factor();
        while (true) {
            if (lex_.accept("*")) {
                e = normalize(mul(e, factor()));
            } else if (lex_.accept("/")) {
                e = normalize(div(e, factor()));
            } else {
                return e;
            }
        }
    }

    Expr factor() {
        if (lex_.accept("-")) return normalize(neg(factor()));
        return postfix();
    }

    Expr postfix() {
        Expr e = atom();
        while (lex_.peek().kind == Token::Punct && lex_.peek().text == "'") {
            lex_.next();
            e = normalize(transpose(e));
        }
        return e;
    }

    Expr atom() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Number) {
            return cst(lex_.next().number);
        }
        if (t.kind == Token::Punct && t.text == "(") {
            lex_.next();
            Expr e = expression();
            lex_.expect(")", "to close parenthesis");
            return e;
        }
        if (t.kind == Token::Punct && t.text == "[") {
            return bracket();
        }
        if (t.kind == Token::Ident) {
            return identifier();
        }
        lex_.fail("expected expression");
    }

    Expr identifier() {
        Token name = lex_.next();
        if (lex_.peek().kind == Token::Punct && lex_.peek().text == "(") {
            return call(name);
        }
        auto c = sym_.constants.find(name.text);
        if (c != sym_.constants.end()) {
            return cst(c->second, name.text);
        }
        if (sym_.shapes.vars.count(name.text) || sym_.allow_unknown_vars) {
            return var(name.text);
        }
        lex_.fail_at(name, "unknown identifier '" + name.text + "'");
    }

    Expr call(const Token& name) {
        lex_.expect("(", "after function name");
        std::vector<Expr> args;
        if (!lex_.accept(")")) {
            do {
                args.push_back(expression());
            } while (lex_.accept(","));
            lex_.expect(")", "to close argument list");
        }
        if (name.text == "sin" || name.text == "cos") {
            if (args.size() != 1) lex_.fail_at(name, name.text + " takes one argument");
            return name.text == "sin" ? sin_expr(args[0]) : cos_expr(args[0]);
        }
        if (name.text == "sat" || name.text == "saturate") {
            if (args.size() == 1) {
                return sat(args[0], sym_.sat_lo, sym_.sat_hi);
            }
            if (args.size() == 3) {
                double lo = 0.0, hi = 0.0;
                if (!scalar_literal(args[1], lo) || !scalar_literal(args[2], hi)) {
                    lex_.fail_at(name, "sat bounds must be scalar constants");
                }
                return sat(args[0], lo, hi);
            }
            lex_.fail_at(name, "sat takes 1 or 3 arguments");
        }
        if (sym_.shapes.fn_arity.count(name.text)) {
            const std::size_t want = sym_.shapes.fn_arity.at(name.text);
            if (args.size() != want) {
                lex_.fail_at(name, "'" + name.text + "' expects " + std::to_string(want) +
                                       " arguments");
            }
            return apply(name.text, std::move(args));
        }
        if (sym_.allow_unknown_vars) {
            return apply(name.text, std::move(args));
        }
        lex_.fail_at(name, "unknown function '" + name.text + "'");
    }

    // [ ... ]: numeric matrix ([[..],[..]]), numeric column ([1, 2]) or
    // expression stack ([a; b]). A stack whose parts are all scalar literals
    // folds into a column constant.
    Expr bracket() {
        Token open = lex_.next();  // '['
        if (lex_.peek().kind == Token::Punct && lex_.peek().text == "[") {
            // numeric matrix literal
            std::vector<std::vector<double>> rows;
            do {
                lex_.expect("[", "to open matrix row");
                std::vector<double> row;
                if (!lex_.accept("]")) {
                    do {
                        row.push_back(lex_.expect_number("in matrix row").number);
                    } while (lex_.accept(","));
                    lex_.expect("]", "to close matrix row");
                }
                rows.push_back(std::move(row));
            } while (lex_.accept(","));
            lex_.expect("]", "to close matrix literal");
            if (rows.empty() || rows.front().empty()) {
                lex_.fail_at(open, "empty matrix literal");
            }
            Matrix m(rows.size(), rows.front().size());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i].size() != m.cols()) {
                    lex_.fail_at(open, "ragged matrix literal");
                }
                for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
            }
            return cst(std::move(m));
        }

        std::vector<Expr> parts;
        bool comma_form = false;
        parts.push_back(expression());
        while (true) {
            if (lex_.accept(",")) {
                comma_form = true;
                parts.push_back(expression());
            } else if (lex_.accept(";")) {
                parts.push_back(expression());
            } else {
                break;
            }
        }
        lex_.expect("]", "to close bracket");

        std::vector<double> entries(parts.size());
        bool all_literal = true;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            all_literal = all_literal && scalar_literal(parts[i], entries[i]);
        }
        if (all_literal) {
            return cst(Matrix::column(entries));
        }
        if (comma_form) {
            lex_.fail_at(open, "comma-separated bracket requires numeric entries; "
                               "use ';' to stack expressions");
        }
        return vcat(std::move(parts));
    }

    // Rewrites T(a)*b into Dot for columns and T(a)*M*a into Quad for
    // constant M; requires shapes, so it is skipped when they are unknown.
    Expr normalize(Expr e) {
        if (e->kind != ExprKind::Mul) return e;
        const Expr& lhs = e->args[0];
        const Expr& rhs = e->args[1];
        auto shape_or_null = [&](const Expr& x, Shape& s) {
            try {
                s = shape_of(x, sym_.shapes);
                return true;
            } catch (const DimensionError&) {
                // ill-typed or unknown shapes are diagnosed by validation later
                return false;
            }
        };
        if (lhs->kind == ExprKind::Transpose && rhs->kind != ExprKind::Const) {
            // const rhs is left alone so a'*M*a can normalize to a quadratic form
            const Expr& a = lhs->args[0];
            Shape sa, sb;
            if (shape_or_null(a, sa) && shape_or_null(rhs, sb) && sa.is_column() &&
                sa == sb) {
                return dot(a, rhs);
            }
        }
        if (lhs->kind == ExprKind::Mul && lhs->args[0]->kind == ExprKind::Transpose &&
            lhs->args[1]->kind == ExprKind::Const) {
            const Expr& a = lhs->args[0]->args[0];
            const Expr& m = lhs->args[1];
            if (struct_eq(a, rhs)) {
                Shape sa;
                if (shape_or_null(a, sa) && sa.is_column() && m->value.rows() == sa.rows &&
                    m->value.cols() == sa.rows) {
                    return quad(m->value, a, m->name);
                }
            }
        }
        return e;
    }

    Lexer& lex_;
    const ParserSymbols& sym_;
};

}  // namespace

Expr parse_expression(Lexer& lex, const ParserSymbols& symbols) {
    return ExprParser(lex, symbols).expression();
}

Predicate parse_predicate(Lexer& lex, const ParserSymbols& symbols) {
    return ExprParser(lex, symbols).predicate();
}

Expr parse_expression(const std::string& text, const ParserSymbols& symbols) {
    Lexer lex(text);
    Expr e = parse_expression(lex, symbols);
    if (!lex.at_end()) lex.fail("trailing input after expression");
    return e;
}

Predicate parse_predicate(const std::string& text, const ParserSymbols& symbols) {
    Lexer lex(text);
    Predicate p = parse_predicate(lex, symbols);
    if (!lex.at_end()) lex.fail("trailing input after predicate");
    return p;
}

}  // namespace credo
