#include "yauyau/expr.hpp"

#include <cmath>
#include <stdexcept>

namespace yauyau::expr {

namespace {

bool is_const(const Expr& e, double v) { return e.kind() == NodeKind::Constant && e.value() == v; }
bool is_const(const Expr& e) { return e.kind() == NodeKind::Constant; }

Expr c(double v) { return Expr::constant(v); }

Expr add(const Expr& a, const Expr& b) {
    if (is_const(a) && is_const(b)) return c(a.value() + b.value());
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return Expr::binary(BinaryOp::Add, a, b);
}

Expr neg(const Expr& a) {
    if (is_const(a)) return c(-a.value());
    if (a.kind() == NodeKind::Negate) return a.operand();
    return Expr::negate(a);
}

Expr sub(const Expr& a, const Expr& b) {
    if (is_const(a) && is_const(b)) return c(a.value() - b.value());
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) return neg(b);
    return Expr::binary(BinaryOp::Sub, a, b);
}

Expr mul(const Expr& a, const Expr& b) {
    if (is_const(a) && is_const(b)) return c(a.value() * b.value());
    if (is_const(a, 0.0) || is_const(b, 0.0)) return c(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    if (is_const(a, -1.0)) return neg(b);
    if (is_const(b, -1.0)) return neg(a);
    return Expr::binary(BinaryOp::Mul, a, b);
}

Expr div(const Expr& a, const Expr& b) {
    if (is_const(a) && is_const(b)) return c(a.value() / b.value());
    if (is_const(a, 0.0)) return c(0.0);
    if (is_const(b, 1.0)) return a;
    return Expr::binary(BinaryOp::Div, a, b);
}

Expr pow(const Expr& a, const Expr& b) {
    if (is_const(a) && is_const(b)) return c(std::pow(a.value(), b.value()));
    if (is_const(b, 1.0)) return a;
    if (is_const(b, 0.0)) return c(1.0);
    return Expr::binary(BinaryOp::Pow, a, b);
}

Expr fn(Function f, const Expr& a) {
    if (is_const(a)) return c(apply(f, a.value()));
    return Expr::call(f, a);
}

Expr derivative_of_call(Function f, const Expr& u) {
    switch (f) {
    case Function::Sin: return fn(Function::Cos, u);
    case Function::Cos: return neg(fn(Function::Sin, u));
    case Function::Exp: return fn(Function::Exp, u);
    case Function::Log: return div(c(1.0), u);
    case Function::Sqrt: return div(c(1.0), mul(c(2.0), fn(Function::Sqrt, u)));
    case Function::Tanh: {
        Expr t = fn(Function::Tanh, u);
        return sub(c(1.0), mul(t, t));
    }
    // sign(0) evaluates to 0, which is the convention for d|u|/du at u = 0.
    case Function::Abs: return fn(Function::Sign, u);
    case Function::Sign: return c(0.0);
    }
    throw std::logic_error("unhandled function");
}

} // namespace

Expr differentiate(const Expr& e, int var) {
    if (var < 1) throw std::invalid_argument("variable index must be >= 1");
    if (e.max_variable() < var) return c(0.0);
    switch (e.kind()) {
    case NodeKind::Constant: return c(0.0);
    case NodeKind::Variable: return c(e.variable_index() == var ? 1.0 : 0.0);
    case NodeKind::Negate: return neg(differentiate(e.operand(), var));
    case NodeKind::Call: {
        Expr du = differentiate(e.operand(), var);
        if (is_const(du, 0.0)) return c(0.0);
        return mul(derivative_of_call(e.function(), e.operand()), du);
    }
    case NodeKind::Binary: {
        const Expr& a = e.lhs();
        const Expr& b = e.rhs();
        Expr da = differentiate(a, var);
        Expr db = differentiate(b, var);
        switch (e.op()) {
        case BinaryOp::Add: return add(da, db);
        case BinaryOp::Sub: return sub(da, db);
        case BinaryOp::Mul: return add(mul(da, b), mul(a, db));
        case BinaryOp::Div:
            if (is_const(db, 0.0)) return div(da, b);
            return div(sub(mul(da, b), mul(a, db)), mul(b, b));
        case BinaryOp::Pow:
            if (!b.depends_on_variables()) {
                // d(a^k) = k a^(k-1) a'
                return mul(mul(b, pow(a, sub(b, c(1.0)))), da);
            }
            // a^b = exp(b log a): d = a^b (b' log a + b a'/a)
            return mul(e, add(mul(db, fn(Function::Log, a)), div(mul(b, da), a)));
        }
    }
    }
    throw std::logic_error("unhandled node kind");
}

Expr divergence(std::span<const Expr> f) {
    Expr sum = c(0.0);
    for (std::size_t d = 0; d < f.size(); ++d) {
        sum = add(sum, differentiate(f[d], static_cast<int>(d) + 1));
    }
    return sum;
}

} // namespace yauyau::expr
