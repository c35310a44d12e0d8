#include "yauyau/expr.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace yauyau::expr {

namespace {

std::shared_ptr<Node> make_node(NodeKind kind) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    return n;
}

void adopt(Node& n, std::vector<Expr> children) {
    n.children = std::move(children);
    for (const auto& c : n.children) {
        n.max_var = std::max(n.max_var, c.max_variable());
        n.size += c.node_count();
    }
}

std::string number_text(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return std::string(buf, ptr);
}

const char* op_text(BinaryOp op) {
    switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Pow: return "^";
    }
    return "?";
}

double apply_binary(BinaryOp op, double a, double b) {
    switch (op) {
    case BinaryOp::Add: return a + b;
    case BinaryOp::Sub: return a - b;
    case BinaryOp::Mul: return a * b;
    case BinaryOp::Div: return a / b;
    case BinaryOp::Pow: return std::pow(a, b);
    }
    return std::nan("");
}

void print(const Expr& e, std::string& out) {
    switch (e.kind()) {
    case NodeKind::Constant: {
        double v = e.value();
        if (std::signbit(v)) {
            out += "(-";
            out += number_text(-v);
            out += ')';
        } else {
            out += number_text(v);
        }
        break;
    }
    case NodeKind::Variable:
        out += 'x';
        out += std::to_string(e.variable_index());
        break;
    case NodeKind::Negate:
        // A bare literal after unary minus would re-parse as a negative constant.
        out += "(-";
        if (e.operand().kind() == NodeKind::Constant) {
            out += '(';
            print(e.operand(), out);
            out += ')';
        } else {
            print(e.operand(), out);
        }
        out += ')';
        break;
    case NodeKind::Binary:
        out += '(';
        print(e.lhs(), out);
        out += op_text(e.op());
        print(e.rhs(), out);
        out += ')';
        break;
    case NodeKind::Call:
        out += function_name(e.function());
        out += '(';
        print(e.operand(), out);
        out += ')';
        break;
    }
}

} // namespace

Expr Expr::constant(double value) {
    auto n = make_node(NodeKind::Constant);
    n->value = value;
    return Expr(std::move(n));
}

Expr Expr::variable(int index) {
    if (index < 1) throw std::invalid_argument("variable index must be >= 1");
    auto n = make_node(NodeKind::Variable);
    n->var = index;
    n->max_var = index;
    return Expr(std::move(n));
}

Expr Expr::negate(Expr operand) {
    auto n = make_node(NodeKind::Negate);
    adopt(*n, {std::move(operand)});
    return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
    auto n = make_node(NodeKind::Binary);
    n->op = op;
    adopt(*n, {std::move(lhs), std::move(rhs)});
    return Expr(std::move(n));
}

Expr Expr::call(Function fn, Expr argument) {
    auto n = make_node(NodeKind::Call);
    n->fn = fn;
    adopt(*n, {std::move(argument)});
    return Expr(std::move(n));
}

NodeKind Expr::kind() const { return node_->kind; }
double Expr::value() const { return node_->value; }
int Expr::variable_index() const { return node_->var; }
BinaryOp Expr::op() const { return node_->op; }
Function Expr::function() const { return node_->fn; }
const Expr& Expr::operand() const { return node_->children.at(0); }
const Expr& Expr::lhs() const { return node_->children.at(0); }
const Expr& Expr::rhs() const { return node_->children.at(1); }
int Expr::max_variable() const { return node_->max_var; }
std::size_t Expr::node_count() const { return node_->size; }

bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    const Node& x = *a.node_;
    const Node& y = *b.node_;
    if (x.kind != y.kind || x.size != y.size) return false;
    switch (x.kind) {
    case NodeKind::Constant:
        // Bitwise, so -0 and 0 differ and NaN equals itself.
        return std::signbit(x.value) == std::signbit(y.value) &&
               (x.value == y.value || (std::isnan(x.value) && std::isnan(y.value)));
    case NodeKind::Variable: return x.var == y.var;
    case NodeKind::Negate: return x.children[0] == y.children[0];
    case NodeKind::Binary:
        return x.op == y.op && x.children[0] == y.children[0] && x.children[1] == y.children[1];
    case NodeKind::Call: return x.fn == y.fn && x.children[0] == y.children[0];
    }
    return false;
}

std::string_view function_name(Function fn) {
    switch (fn) {
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Exp: return "exp";
    case Function::Log: return "log";
    case Function::Sqrt: return "sqrt";
    case Function::Tanh: return "tanh";
    case Function::Abs: return "abs";
    case Function::Sign: return "sign";
    }
    return "?";
}

double apply(Function fn, double x) {
    switch (fn) {
    case Function::Sin: return std::sin(x);
    case Function::Cos: return std::cos(x);
    case Function::Exp: return std::exp(x);
    case Function::Log: return std::log(x);
    case Function::Sqrt: return std::sqrt(x);
    case Function::Tanh: return std::tanh(x);
    case Function::Abs: return std::fabs(x);
    case Function::Sign: return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : (std::isnan(x) ? x : 0.0));
    }
    return std::nan("");
}

std::string to_string(const Expr& e) {
    std::string out;
    print(e, out);
    return out;
}

double evaluate(const Expr& e, std::span<const double> point) {
    switch (e.kind()) {
    case NodeKind::Constant: return e.value();
    case NodeKind::Variable: return point[static_cast<std::size_t>(e.variable_index() - 1)];
    case NodeKind::Negate: return -evaluate(e.operand(), point);
    case NodeKind::Binary:
        return apply_binary(e.op(), evaluate(e.lhs(), point), evaluate(e.rhs(), point));
    case NodeKind::Call: return apply(e.function(), evaluate(e.operand(), point));
    }
    return std::nan("");
}

// -- Program ----------------------------------------------------------------

Program::Program(const Expr& e) : max_var_(e.max_variable()) {
    int depth = 0;
    emit(e, depth);
    assert(depth == 1);
}

void Program::emit(const Expr& e, int& depth) {
    auto push = [&](Instr in, int delta) {
        code_.push_back(in);
        depth += delta;
        max_depth_ = std::max(max_depth_, depth);
    };
    switch (e.kind()) {
    case NodeKind::Constant: push({Code::Const, Function::Sin, 0, e.value()}, 1); break;
    case NodeKind::Variable: push({Code::Load, Function::Sin, e.variable_index() - 1, 0.0}, 1); break;
    case NodeKind::Negate:
        emit(e.operand(), depth);
        push({Code::Neg, Function::Sin, 0, 0.0}, 0);
        break;
    case NodeKind::Binary: {
        emit(e.lhs(), depth);
        emit(e.rhs(), depth);
        Code c = Code::Add;
        switch (e.op()) {
        case BinaryOp::Add: c = Code::Add; break;
        case BinaryOp::Sub: c = Code::Sub; break;
        case BinaryOp::Mul: c = Code::Mul; break;
        case BinaryOp::Div: c = Code::Div; break;
        case BinaryOp::Pow: c = Code::Pow; break;
        }
        push({c, Function::Sin, 0, 0.0}, -1);
        break;
    }
    case NodeKind::Call:
        emit(e.operand(), depth);
        push({Code::Call, e.function(), 0, 0.0}, 0);
        break;
    }
}

double Program::operator()(std::span<const double> point) const {
    // Expression depth in practice is small; fall back to the heap otherwise.
    if (code_.empty()) throw std::logic_error("evaluating an empty program");
    constexpr int kInline = 64;
    double inline_stack[kInline];
    std::vector<double> heap;
    double* stack = inline_stack;
    if (max_depth_ > kInline) {
        heap.resize(static_cast<std::size_t>(max_depth_));
        stack = heap.data();
    }
    int sp = 0;
    for (const Instr& in : code_) {
        switch (in.code) {
        case Code::Const: stack[sp++] = in.value; break;
        case Code::Load: stack[sp++] = point[static_cast<std::size_t>(in.var)]; break;
        case Code::Neg: stack[sp - 1] = -stack[sp - 1]; break;
        case Code::Add: --sp; stack[sp - 1] = stack[sp - 1] + stack[sp]; break;
        case Code::Sub: --sp; stack[sp - 1] = stack[sp - 1] - stack[sp]; break;
        case Code::Mul: --sp; stack[sp - 1] = stack[sp - 1] * stack[sp]; break;
        case Code::Div: --sp; stack[sp - 1] = stack[sp - 1] / stack[sp]; break;
        case Code::Pow: --sp; stack[sp - 1] = std::pow(stack[sp - 1], stack[sp]); break;
        case Code::Call: stack[sp - 1] = apply(in.fn, stack[sp - 1]); break;
        }
    }
    return stack[0];
}

void Program::eval_batch(std::span<const double* const> columns, std::size_t n, double* out,
                         std::vector<double>& scratch) const {
    if (code_.empty()) throw std::logic_error("evaluating an empty program");
    scratch.resize(static_cast<std::size_t>(max_depth_) * n);
    auto slot = [&](int i) { return scratch.data() + static_cast<std::size_t>(i) * n; };
    int sp = 0;
    for (const Instr& in : code_) {
        switch (in.code) {
        case Code::Const: std::fill_n(slot(sp++), n, in.value); break;
        case Code::Load: std::copy_n(columns[static_cast<std::size_t>(in.var)], n, slot(sp++)); break;
        case Code::Neg: {
            double* a = slot(sp - 1);
            for (std::size_t i = 0; i < n; ++i) a[i] = -a[i];
            break;
        }
        case Code::Call: {
            double* a = slot(sp - 1);
            for (std::size_t i = 0; i < n; ++i) a[i] = apply(in.fn, a[i]);
            break;
        }
        default: {
            --sp;
            double* a = slot(sp - 1);
            const double* b = slot(sp);
            switch (in.code) {
            case Code::Add: for (std::size_t i = 0; i < n; ++i) a[i] = a[i] + b[i]; break;
            case Code::Sub: for (std::size_t i = 0; i < n; ++i) a[i] = a[i] - b[i]; break;
            case Code::Mul: for (std::size_t i = 0; i < n; ++i) a[i] = a[i] * b[i]; break;
            case Code::Div: for (std::size_t i = 0; i < n; ++i) a[i] = a[i] / b[i]; break;
            case Code::Pow: for (std::size_t i = 0; i < n; ++i) a[i] = std::pow(a[i], b[i]); break;
            default: break;
            }
        }
        }
    }
    std::copy_n(slot(0), n, out);
}

} // namespace yauyau::expr
