#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <stdexcept>
#include <string>

#include "dense.hpp"

namespace parabolica {

/// Arithmetic-expression trees for config-defined coefficients.
///
/// Grammar: +, -, *, /, ^ (constant exponent), exp(e), constants,
/// x1..x9, t and the radial primitive |x|^2.  Differentiation is exact
/// on the tree; there is no simplification beyond constant folding.
namespace expr {

enum class Kind { Const, Var, Time, Norm2, Add, Sub, Mul, Div, Pow, Exp, Neg };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Kind kind;
    double value = 0.0;  // Const payload, or the exponent for Pow
    int var = 0;         // Var payload (0-based coordinate index)
    NodePtr a, b;
};

inline NodePtr constant(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Const;
    n->value = v;
    return n;
}

inline NodePtr variable(int i) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Var;
    n->var = i;
    return n;
}

inline NodePtr time_var() {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Time;
    return n;
}

inline NodePtr norm2() {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Norm2;
    return n;
}

inline bool is_const(const NodePtr& n, double v) {
    return n->kind == Kind::Const && n->value == v;
}

inline NodePtr binary(Kind k, NodePtr a, NodePtr b) {
    if (a->kind == Kind::Const && b->kind == Kind::Const) {
        switch (k) {
            case Kind::Add: return constant(a->value + b->value);
            case Kind::Sub: return constant(a->value - b->value);
            case Kind::Mul: return constant(a->value * b->value);
            case Kind::Div: return constant(a->value / b->value);
            default: break;
        }
    }
    if (k == Kind::Add) {
        if (is_const(a, 0.0)) return b;
        if (is_const(b, 0.0)) return a;
    }
    if (k == Kind::Sub && is_const(b, 0.0)) return a;
    if (k == Kind::Mul) {
        if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
        if (is_const(a, 1.0)) return b;
        if (is_const(b, 1.0)) return a;
    }
    if (k == Kind::Div && is_const(a, 0.0)) return constant(0.0);
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

inline NodePtr add(NodePtr a, NodePtr b) { return binary(Kind::Add, std::move(a), std::move(b)); }
inline NodePtr sub(NodePtr a, NodePtr b) { return binary(Kind::Sub, std::move(a), std::move(b)); }
inline NodePtr mul(NodePtr a, NodePtr b) { return binary(Kind::Mul, std::move(a), std::move(b)); }
inline NodePtr div(NodePtr a, NodePtr b) { return binary(Kind::Div, std::move(a), std::move(b)); }

inline NodePtr pow(NodePtr base, double expo) {
    if (expo == 1.0) return base;
    if (expo == 0.0) return constant(1.0);
    if (base->kind == Kind::Const) return constant(std::pow(base->value, expo));
    auto n = std::make_shared<Node>();
    n->kind = Kind::Pow;
    n->value = expo;
    n->a = std::move(base);
    return n;
}

inline NodePtr exp(NodePtr a) {
    if (a->kind == Kind::Const) return constant(std::exp(a->value));
    auto n = std::make_shared<Node>();
    n->kind = Kind::Exp;
    n->a = std::move(a);
    return n;
}

inline NodePtr neg(NodePtr a) {
    if (a->kind == Kind::Const) return constant(-a->value);
    auto n = std::make_shared<Node>();
    n->kind = Kind::Neg;
    n->a = std::move(a);
    return n;
}

inline double eval(const NodePtr& n, double t, const Vec& x) {
    switch (n->kind) {
        case Kind::Const: return n->value;
        case Kind::Var: return x[static_cast<std::size_t>(n->var)];
        case Kind::Time: return t;
        case Kind::Norm2: return x.norm2();
        case Kind::Add: return eval(n->a, t, x) + eval(n->b, t, x);
        case Kind::Sub: return eval(n->a, t, x) - eval(n->b, t, x);
        case Kind::Mul: return eval(n->a, t, x) * eval(n->b, t, x);
        case Kind::Div: return eval(n->a, t, x) / eval(n->b, t, x);
        case Kind::Pow: return std::pow(eval(n->a, t, x), n->value);
        case Kind::Exp: return std::exp(eval(n->a, t, x));
        case Kind::Neg: return -eval(n->a, t, x);
    }
    return 0.0;
}

/// d/dx_i, exact on the tree.
inline NodePtr diff(const NodePtr& n, int i) {
    switch (n->kind) {
        case Kind::Const:
        case Kind::Time: return constant(0.0);
        case Kind::Var: return constant(n->var == i ? 1.0 : 0.0);
        case Kind::Norm2: return mul(constant(2.0), variable(i));
        case Kind::Add: return add(diff(n->a, i), diff(n->b, i));
        case Kind::Sub: return sub(diff(n->a, i), diff(n->b, i));
        case Kind::Mul: return add(mul(diff(n->a, i), n->b), mul(n->a, diff(n->b, i)));
        case Kind::Div:
            return div(sub(mul(diff(n->a, i), n->b), mul(n->a, diff(n->b, i))),
                       mul(n->b, n->b));
        case Kind::Pow:
            return mul(mul(constant(n->value), pow(n->a, n->value - 1.0)), diff(n->a, i));
        case Kind::Exp: {
            auto e = std::make_shared<Node>();
            e->kind = Kind::Exp;
            e->a = n->a;
            return mul(NodePtr(e), diff(n->a, i));
        }
        case Kind::Neg: return neg(diff(n->a, i));
    }
    return constant(0.0);
}

inline bool depends_on_time(const NodePtr& n) {
    switch (n->kind) {
        case Kind::Time: return true;
        case Kind::Const:
        case Kind::Var:
        case Kind::Norm2: return false;
        case Kind::Pow:
        case Kind::Exp:
        case Kind::Neg: return depends_on_time(n->a);
        default: return depends_on_time(n->a) || depends_on_time(n->b);
    }
}

struct ParseError : std::runtime_error {
    std::size_t position;
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " (at offset " + std::to_string(pos) + ")"), position(pos) {}
};

namespace detail {

struct Parser {
    const std::string& s;
    std::size_t pos = 0;
    int dims;

    Parser(const std::string& text, int d) : s(text), dims(d) {}

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool consume(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }

    NodePtr parse() {
        NodePtr e = expression();
        skip_ws();
        if (pos != s.size()) throw ParseError("unexpected trailing input", pos);
        return e;
    }

    NodePtr expression() {
        NodePtr e = term();
        while (true) {
            if (consume('+')) e = add(e, term());
            else if (consume('-')) e = sub(e, term());
            else return e;
        }
    }

    NodePtr term() {
        NodePtr e = factor();
        while (true) {
            if (consume('*')) e = mul(e, factor());
            else if (consume('/')) e = div(e, factor());
            else return e;
        }
    }

    NodePtr factor() {
        if (consume('-')) return neg(factor());
        if (consume('+')) return factor();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (consume('^')) {
            NodePtr e = factor();
            if (e->kind != Kind::Const)
                throw ParseError("exponent must be a constant", pos);
            return pow(base, e->value);
        }
        return base;
    }

    NodePtr primary() {
        skip_ws();
        if (pos >= s.size()) throw ParseError("unexpected end of expression", pos);
        const char c = s[pos];
        if (c == '(') {
            ++pos;
            NodePtr e = expression();
            if (!consume(')')) throw ParseError("missing ')'", pos);
            return e;
        }
        if (c == '|') return norm_primitive();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return ident();
        throw ParseError(std::string("unexpected character '") + c + "'", pos);
    }

    NodePtr norm_primitive() {
        // |x|^2 ; higher powers of the radius are written (|x|^2)^k
        const std::size_t start = pos;
        if (s.compare(pos, 3, "|x|") != 0) throw ParseError("expected |x|", start);
        pos += 3;
        if (!consume('^')) throw ParseError("|x| must be squared: write |x|^2", pos);
        NodePtr e = factor();
        if (e->kind != Kind::Const) throw ParseError("exponent of |x| must be constant", pos);
        const double expo = e->value;
        if (expo == 2.0) return norm2();
        if (std::fmod(expo, 2.0) == 0.0) return pow(norm2(), expo / 2.0);
        throw ParseError("only even powers of |x| are smooth; use (|x|^2)^a", start);
    }

    NodePtr number() {
        std::size_t end = pos;
        while (end < s.size() &&
               (std::isdigit(static_cast<unsigned char>(s[end])) || s[end] == '.' ||
                s[end] == 'e' || s[end] == 'E' ||
                ((s[end] == '+' || s[end] == '-') && end > pos &&
                 (s[end - 1] == 'e' || s[end - 1] == 'E'))))
            ++end;
        const std::string tok = s.substr(pos, end - pos);
        try {
            const double v = std::stod(tok);
            pos = end;
            return constant(v);
        } catch (const std::exception&) {
            throw ParseError("bad numeric literal '" + tok + "'", pos);
        }
    }

    NodePtr ident() {
        std::size_t end = pos;
        while (end < s.size() && (std::isalnum(static_cast<unsigned char>(s[end])))) ++end;
        const std::string name = s.substr(pos, end - pos);
        if (name == "t") {
            pos = end;
            return time_var();
        }
        if (name == "exp") {
            pos = end;
            if (!consume('(')) throw ParseError("exp requires parentheses", pos);
            NodePtr e = expression();
            if (!consume(')')) throw ParseError("missing ')' after exp argument", pos);
            return exp(e);
        }
        if (name.size() >= 2 && name[0] == 'x') {
            const int idx = std::atoi(name.c_str() + 1);
            if (idx >= 1 && idx <= dims) {
                pos = end;
                return variable(idx - 1);
            }
            throw ParseError("coordinate " + name + " out of range for d=" + std::to_string(dims), pos);
        }
        throw ParseError("unknown identifier '" + name + "'", pos);
    }
};

}  // namespace detail

/// Parse an expression over x1..xd and t.
inline NodePtr parse(const std::string& text, int d) {
    detail::Parser p(text, d);
    return p.parse();
}

}  // namespace expr
}  // namespace parabolica
