#include "yauyau/errors.hpp"
#include "yauyau/expr.hpp"

#include <cctype>
#include <charconv>
#include <optional>

namespace yauyau::expr {

namespace {

std::optional<Function> lookup_function(std::string_view name) {
    if (name == "sin") return Function::Sin;
    if (name == "cos") return Function::Cos;
    if (name == "exp") return Function::Exp;
    if (name == "log") return Function::Log;
    if (name == "sqrt") return Function::Sqrt;
    if (name == "tanh") return Function::Tanh;
    if (name == "abs") return Function::Abs;
    return std::nullopt;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
public:
    Parser(std::string_view text, int dim) : text_(text), dim_(dim) {}

    Expr run() {
        skip_space();
        if (at_end()) fail(ParseErrorKind::Syntax, "empty expression");
        Expr e = expression();
        skip_space();
        if (!at_end()) fail(ParseErrorKind::Syntax, std::string("unexpected '") + peek() + "'");
        return e;
    }

private:
    [[noreturn]] void fail(ParseErrorKind kind, const std::string& msg) const { fail_at(kind, pos_, msg); }
    [[noreturn]] void fail_at(ParseErrorKind kind, std::size_t at, const std::string& msg) const {
        throw ParseError(kind, at, msg);
    }

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return at_end() ? '\0' : text_[pos_]; }
    void skip_space() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip_space();
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) {
            fail(ParseErrorKind::Syntax,
                 at_end() ? std::string("expected '") + c + "' before end of input"
                          : std::string("expected '") + c + "'");
        }
    }

    Expr expression() {
        Expr lhs = term();
        for (;;) {
            if (accept('+')) lhs = Expr::binary(BinaryOp::Add, lhs, term());
            else if (accept('-')) lhs = Expr::binary(BinaryOp::Sub, lhs, term());
            else return lhs;
        }
    }

    Expr term() {
        Expr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = Expr::binary(BinaryOp::Mul, lhs, unary());
            else if (accept('/')) lhs = Expr::binary(BinaryOp::Div, lhs, unary());
            else return lhs;
        }
    }

    Expr unary() {
        if (accept('-')) {
            Expr operand = unary();
            // "-2" is the constant -2; "-(2)" and "-2^2" stay negations.
            if (bare_literal_ && operand.kind() == NodeKind::Constant) {
                bare_literal_ = false;
                return Expr::constant(-operand.value());
            }
            bare_literal_ = false;
            return Expr::negate(operand);
        }
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (accept('^')) {
            bare_literal_ = false;
            Expr exponent = unary();
            bare_literal_ = false;
            return Expr::binary(BinaryOp::Pow, base, exponent);
        }
        return base;
    }

    Expr primary() {
        skip_space();
        bare_literal_ = false;
        if (at_end()) fail(ParseErrorKind::Syntax, "unexpected end of input");
        char c = peek();
        if (is_digit(c) || c == '.') return number();
        if (c == '(') {
            ++pos_;
            Expr inner = expression();
            expect(')');
            bare_literal_ = false;
            return inner;
        }
        if (is_ident_start(c)) return identifier();
        fail(ParseErrorKind::Syntax, std::string("unexpected '") + c + "'");
    }

    Expr number() {
        std::size_t start = pos_;
        while (!at_end() && is_digit(peek())) ++pos_;
        if (peek() == '.') {
            ++pos_;
            while (!at_end() && is_digit(peek())) ++pos_;
        }
        if (peek() == 'e' || peek() == 'E') {
            std::size_t save = pos_;
            ++pos_;
            if (peek() == '+' || peek() == '-') ++pos_;
            if (!is_digit(peek())) {
                pos_ = save;
            } else {
                while (!at_end() && is_digit(peek())) ++pos_;
            }
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (ec != std::errc{} || ptr != text_.data() + pos_) {
            fail_at(ParseErrorKind::Syntax, start, "malformed number");
        }
        bare_literal_ = true;
        return Expr::constant(v);
    }

    Expr identifier() {
        std::size_t start = pos_;
        while (!at_end() && is_ident_char(peek())) ++pos_;
        std::string_view name = text_.substr(start, pos_ - start);

        skip_space();
        if (peek() == '(') {
            auto fn = lookup_function(name);
            if (!fn) fail_at(ParseErrorKind::UnknownFunction, start, "unknown function '" + std::string(name) + "'");
            ++pos_;
            skip_space();
            if (peek() == ')') {
                fail_at(ParseErrorKind::Arity, start, std::string(name) + " expects 1 argument, got 0");
            }
            Expr arg = expression();
            int count = 1;
            while (accept(',')) {
                expression();
                ++count;
            }
            if (count != 1) {
                fail_at(ParseErrorKind::Arity, start,
                        std::string(name) + " expects 1 argument, got " + std::to_string(count));
            }
            expect(')');
            return Expr::call(*fn, arg);
        }

        if (name.size() >= 2 && name[0] == 'x') {
            int index = 0;
            auto digits = name.substr(1);
            auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
            if (ec == std::errc{} && ptr == digits.data() + digits.size()) {
                if (index < 1 || index > dim_) {
                    fail_at(ParseErrorKind::UnknownVariable, start,
                            "unknown variable '" + std::string(name) + "' (dimension is " + std::to_string(dim_) + ")");
                }
                return Expr::variable(index);
            }
        }
        if (lookup_function(name)) {
            fail(ParseErrorKind::Syntax, "expected '(' after function " + std::string(name));
        }
        fail_at(ParseErrorKind::UnknownVariable, start, "unknown identifier '" + std::string(name) + "'");
    }

    std::string_view text_;
    int dim_;
    std::size_t pos_ = 0;
    bool bare_literal_ = false;
};

} // namespace

Expr parse(std::string_view text, int dim) {
    if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
    return Parser(text, dim).run();
}

} // namespace yauyau::expr
