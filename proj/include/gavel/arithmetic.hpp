#pragma once

#include <cctype>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "gavel/errors.hpp"
#include "gavel/money.hpp"

namespace gavel::arith {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

class FormulaError : public Error {
public:
    explicit FormulaError(const std::string& msg) : Error(msg) {}
};

/// AST of the closed compensation-formula grammar:
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := NUMBER | IDENT | '(' expr ')' | ('min'|'max') '(' expr ',' expr ')'
///             | '-' factor
/// Numbers are decimal literals in currency units; identifiers reference
/// other components' stated amounts.
struct Expr {
    enum class Kind { Number, Field, Add, Sub, Mul, Div, Min, Max, Neg };
    Kind kind;
    std::string literal; // Number: source text; Field: identifier
    std::shared_ptr<const Expr> lhs, rhs;
};

using ExprPtr = std::shared_ptr<const Expr>;

inline ExprPtr make_number(std::string text) {
    return std::make_shared<Expr>(Expr{Expr::Kind::Number, std::move(text), nullptr, nullptr});
}
inline ExprPtr make_field(std::string name) {
    return std::make_shared<Expr>(Expr{Expr::Kind::Field, std::move(name), nullptr, nullptr});
}
inline ExprPtr make_node(Expr::Kind k, ExprPtr a, ExprPtr b = nullptr) {
    return std::make_shared<Expr>(Expr{k, {}, std::move(a), std::move(b)});
}

namespace detail {

struct Parser {
    std::string_view src;
    size_t pos = 0;

    void skip_ws() {
        while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t')) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < src.size() && src[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) {
        throw FormulaError("formula parse error at offset " + std::to_string(pos) + ": " + what +
                           " in \"" + std::string(src) + "\"");
    }

    ExprPtr parse_expr() {
        ExprPtr lhs = parse_term();
        for (;;) {
            if (eat('+'))
                lhs = make_node(Expr::Kind::Add, lhs, parse_term());
            else if (eat('-'))
                lhs = make_node(Expr::Kind::Sub, lhs, parse_term());
            else
                return lhs;
        }
    }

    ExprPtr parse_term() {
        ExprPtr lhs = parse_factor();
        for (;;) {
            if (eat('*'))
                lhs = make_node(Expr::Kind::Mul, lhs, parse_factor());
            else if (eat('/'))
                lhs = make_node(Expr::Kind::Div, lhs, parse_factor());
            else
                return lhs;
        }
    }

    ExprPtr parse_factor() {
        skip_ws();
        if (pos >= src.size()) fail("unexpected end of formula");
        char c = src[pos];
        if (c == '-') {
            ++pos;
            return make_node(Expr::Kind::Neg, parse_factor());
        }
        if (c == '(') {
            ++pos;
            ExprPtr inner = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        fail(std::string("unexpected character '") + c + "'");
    }

    ExprPtr parse_number() {
        size_t start = pos;
        bool dot = false;
        while (pos < src.size() &&
               (std::isdigit(static_cast<unsigned char>(src[pos])) || src[pos] == '.')) {
            if (src[pos] == '.') {
                if (dot) fail("second '.' in number");
                dot = true;
            }
            ++pos;
        }
        std::string text(src.substr(start, pos - start));
        if (text == "." || text.empty()) fail("bad number");
        return make_number(std::move(text));
    }

    ExprPtr parse_ident() {
        size_t start = pos;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
            ++pos;
        std::string name(src.substr(start, pos - start));
        if (name == "min" || name == "max") {
            if (!eat('(')) fail("expected '(' after " + name);
            ExprPtr a = parse_expr();
            if (!eat(',')) fail("expected ',' in " + name);
            ExprPtr b = parse_expr();
            if (!eat(')')) fail("expected ')' after " + name);
            return make_node(name == "min" ? Expr::Kind::Min : Expr::Kind::Max, a, b);
        }
        return make_field(std::move(name));
    }
};

inline Rational rational_from_decimal(const std::string& text) {
    size_t dot = text.find('.');
    std::string digits = text;
    size_t places = 0;
    if (dot != std::string::npos) {
        places = text.size() - dot - 1;
        digits = text.substr(0, dot) + text.substr(dot + 1);
    }
    if (digits.empty()) throw FormulaError("bad numeric literal: " + text);
    BigInt num(digits);
    BigInt den = 1;
    for (size_t i = 0; i < places; ++i) den *= 10;
    return Rational(num, den);
}

} // namespace detail

inline ExprPtr parse_formula(const std::string& src) {
    detail::Parser p{src};
    ExprPtr e = p.parse_expr();
    p.skip_ws();
    if (p.pos != src.size()) p.fail("trailing input");
    return e;
}

using FieldResolver = std::function<std::optional<Rational>(const std::string&)>;

inline Rational evaluate(const Expr& e, const FieldResolver& fields) {
    switch (e.kind) {
        case Expr::Kind::Number: return detail::rational_from_decimal(e.literal);
        case Expr::Kind::Field: {
            auto v = fields ? fields(e.literal) : std::nullopt;
            if (!v) throw FormulaError("unknown field reference: " + e.literal);
            return *v;
        }
        case Expr::Kind::Add: return evaluate(*e.lhs, fields) + evaluate(*e.rhs, fields);
        case Expr::Kind::Sub: return evaluate(*e.lhs, fields) - evaluate(*e.rhs, fields);
        case Expr::Kind::Mul: return evaluate(*e.lhs, fields) * evaluate(*e.rhs, fields);
        case Expr::Kind::Div: {
            Rational d = evaluate(*e.rhs, fields);
            if (d == 0) throw FormulaError("division by zero");
            return evaluate(*e.lhs, fields) / d;
        }
        case Expr::Kind::Min: {
            Rational a = evaluate(*e.lhs, fields), b = evaluate(*e.rhs, fields);
            return a < b ? a : b;
        }
        case Expr::Kind::Max: {
            Rational a = evaluate(*e.lhs, fields), b = evaluate(*e.rhs, fields);
            return a > b ? a : b;
        }
        case Expr::Kind::Neg: return -evaluate(*e.lhs, fields);
    }
    throw FormulaError("unreachable");
}

/// Rounds a value in currency units to integer cents, half away from zero.
/// This is the single rounding point of the whole checker.
inline Money to_money_half_up(const Rational& units) {
    Rational cents = units * 100;
    BigInt num = boost::multiprecision::numerator(cents);
    BigInt den = boost::multiprecision::denominator(cents); // always > 0
    bool neg = num < 0;
    if (neg) num = -num;
    BigInt q = (2 * num + den) / (2 * den); // floor((n + d/2)/d)
    if (q > BigInt(std::numeric_limits<int64_t>::max()))
        throw FormulaError("formula value out of money range");
    int64_t c = q.convert_to<int64_t>();
    return Money(neg ? -c : c);
}

/// Parses and evaluates a formula over named stated amounts, rounding to cents.
inline Money evaluate_money(const std::string& formula,
                            const std::map<std::string, Money>& fields) {
    ExprPtr e = parse_formula(formula);
    FieldResolver resolver = [&](const std::string& name) -> std::optional<Rational> {
        auto it = fields.find(name);
        if (it == fields.end()) return std::nullopt;
        return Rational(it->second.cents, 100);
    };
    return to_money_half_up(evaluate(*e, resolver));
}

/// Canonical text for an AST; parse_formula(render(e)) evaluates identically.
inline std::string render(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Number: return e.literal;
        case Expr::Kind::Field: return e.literal;
        case Expr::Kind::Add: return "(" + render(*e.lhs) + " + " + render(*e.rhs) + ")";
        case Expr::Kind::Sub: return "(" + render(*e.lhs) + " - " + render(*e.rhs) + ")";
        case Expr::Kind::Mul: return "(" + render(*e.lhs) + " * " + render(*e.rhs) + ")";
        case Expr::Kind::Div: return "(" + render(*e.lhs) + " / " + render(*e.rhs) + ")";
        case Expr::Kind::Min: return "min(" + render(*e.lhs) + ", " + render(*e.rhs) + ")";
        case Expr::Kind::Max: return "max(" + render(*e.lhs) + ", " + render(*e.rhs) + ")";
        case Expr::Kind::Neg: return "(-" + render(*e.lhs) + ")";
    }
    return "?";
}

} // namespace gavel::arith
