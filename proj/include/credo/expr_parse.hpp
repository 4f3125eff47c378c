#pragma once

#include <map>
#include <string>
#include <vector>

#include "credo/expr.hpp"

namespace credo {

struct Token {
    enum Kind { Ident, Number, Punct, End };
    Kind kind = End;
    std::string text;
    double number = 0.0;
    int line = 0;
    int col = 0;
};

// Tokenizer for the model / expression / vc grammars. `#` starts a comment
// that runs to the end of the line.
class Lexer {
public:
    explicit Lexer(const std::string& text);

    const Token& peek(std::size_t ahead = 0) const;
    Token next();
    bool accept(const std::string& punct_or_ident);
    Token expect(const std::string& punct_or_ident, const std::string& context);
    Token expect_ident(const std::string& context);
    Token expect_number(const std::string& context);
    bool at_end() const { return peek().kind == Token::End; }

    [[noreturn]] void fail(const std::string& msg) const;
    [[noreturn]] void fail_at(const Token& t, const std::string& msg) const;

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

// Symbol table handed to the expression parser.
struct ParserSymbols {
    ShapeEnv shapes;                          // declared variables and externals
    std::map<std::string, Matrix> constants;  // named constants (bindings)
    double sat_lo = -1.0;
    double sat_hi = 1.0;
    bool allow_unknown_vars = false;          // test convenience
};

// Parses the infix expression grammar: + - * / ' (transpose), sat/saturate,
// sin, cos, declared external calls, [a; b] stacking and numeric literals.
// Normalizes a'*b on columns to Dot and a'*M*a with constant M to Quad.
Expr parse_expression(Lexer& lex, const ParserSymbols& symbols);

// lhs <= rhs ( && lhs <= rhs )* ; `a >= b` is normalized to `b <= a`.
Predicate parse_predicate(Lexer& lex, const ParserSymbols& symbols);

// Convenience one-shot wrappers.
Expr parse_expression(const std::string& text, const ParserSymbols& symbols);
Predicate parse_predicate(const std::string& text, const ParserSymbols& symbols);

}  // namespace credo
