#pragma once

#include "rational_function.hpp"

#include <cctype>
#include <stdexcept>
#include <string>

namespace jetcal {

// Raised on malformed input; pos is a 0-based byte offset into the source.
struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " at offset " + std::to_string(pos)), pos(pos) {}
    std::size_t pos;
};

// Recursive-descent parser for rational expressions:
//
//   expr     := term (('+' | '-') term)*
//   term     := factor (('*' | '/') factor)*
//   factor   := '-' factor | base ('^' exponent)?
//   base     := integer | variable | '(' expr ')'
//   exponent := '-'? integer | '(' '-'? integer ')'
//
// Only integer literals, named variables from the supplied context,
// arithmetic, and integer powers are accepted. Anything else (function
// names, floating literals) is a parse error, so the language stays inside
// exact rational arithmetic.
class ExprParser {
public:
    ExprParser(std::string src, Vars vars) : src_(std::move(src)), vars_(std::move(vars)) {}

    RatFn parse() {
        RatFn v = expr();
        skip_ws();
        if (pos_ != src_.size()) throw ParseError("unexpected trailing input", pos_);
        return v;
    }

private:
    RatFn expr() {
        RatFn v = term();
        for (;;) {
            skip_ws();
            if (peek() == '+') {
                ++pos_;
                v += term();
            } else if (peek() == '-') {
                ++pos_;
                v -= term();
            } else {
                return v;
            }
        }
    }

    RatFn term() {
        RatFn v = factor();
        for (;;) {
            skip_ws();
            if (peek() == '*') {
                ++pos_;
                v *= factor();
            } else if (peek() == '/') {
                std::size_t at = pos_++;
                RatFn d = factor();
                if (d.is_zero()) throw ParseError("division by zero", at);
                v /= d;
            } else {
                return v;
            }
        }
    }

    RatFn factor() {
        skip_ws();
        if (peek() == '-') {
            ++pos_;
            return -factor();
        }
        RatFn b = base();
        skip_ws();
        if (peek() == '^') {
            std::size_t at = pos_++;
            long e = exponent();
            if (e < 0 && b.is_zero()) throw ParseError("zero base with negative exponent", at);
            b = b.pow(static_cast<int>(e));
        }
        return b;
    }

    RatFn base() {
        skip_ws();
        char c = peek();
        if (c == '(') {
            ++pos_;
            RatFn v = expr();
            skip_ws();
            if (peek() != ')') throw ParseError("expected ')'", pos_);
            ++pos_;
            return v;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return RatFn::constant(vars_, Rat(integer()));
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t at = pos_;
            std::string name = identifier();
            int idx = vars_->find(name);
            if (idx < 0) throw ParseError("unknown variable '" + name + "'", at);
            return RatFn::variable(vars_, idx);
        }
        throw ParseError("expected a number, variable, or '('", pos_);
    }

    long exponent() {
        skip_ws();
        bool paren = false;
        if (peek() == '(') {
            paren = true;
            ++pos_;
            skip_ws();
        }
        bool neg = false;
        if (peek() == '-') {
            neg = true;
            ++pos_;
            skip_ws();
        }
        if (!std::isdigit(static_cast<unsigned char>(peek())))
            throw ParseError("exponent must be an integer literal", pos_);
        BigInt v = integer();
        if (v > 64) throw ParseError("exponent too large", pos_);
        if (paren) {
            skip_ws();
            if (peek() != ')') throw ParseError("expected ')' after exponent", pos_);
            ++pos_;
        }
        long e = v.convert_to<long>();
        return neg ? -e : e;
    }

    BigInt integer() {
        BigInt v = 0;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            v = v * 10 + (src_[pos_] - '0');
            ++pos_;
        }
        if (pos_ < src_.size() && src_[pos_] == '.')
            throw ParseError("floating-point literals are not supported", pos_);
        return v;
    }

    std::string identifier() {
        std::size_t start = pos_;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_')
                ++pos_;
            else
                break;
        }
        return src_.substr(start, pos_ - start);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }

    std::string src_;
    Vars vars_;
    std::size_t pos_ = 0;
};

inline RatFn parse_expr(const std::string& src, const Vars& vars) {
    return ExprParser(src, vars).parse();
}

}  // namespace jetcal
