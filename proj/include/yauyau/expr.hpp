#pragma once

// Arithmetic expressions over state variables x1..xD.
//
// Grammar (precedence high to low):
//   primary := number | xK | fn '(' expr ')' | '(' expr ')'
//   power   := primary ['^' unary]            (right associative)
//   unary   := '-' unary | power
//   term    := unary {('*' | '/') unary}
//   expr    := term {('+' | '-') term}
// fn is one of sin cos exp log sqrt tanh abs.
//
// Expressions are immutable and share structure; copying an Expr is cheap and
// evaluation is safe from any number of threads.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace yauyau::expr {

enum class NodeKind { Constant, Variable, Negate, Binary, Call };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

// Sign is produced by differentiating abs; it is not accepted by the parser.
enum class Function { Sin, Cos, Exp, Log, Sqrt, Tanh, Abs, Sign };

struct Node;

class Expr {
public:
    static Expr constant(double value);
    static Expr variable(int index); // 1-based
    static Expr negate(Expr operand);
    static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
    static Expr call(Function fn, Expr argument);

    NodeKind kind() const;
    double value() const;         // Constant
    int variable_index() const;   // Variable
    BinaryOp op() const;          // Binary
    Function function() const;    // Call
    const Expr& operand() const;  // Negate, Call
    const Expr& lhs() const;      // Binary
    const Expr& rhs() const;      // Binary

    // Highest variable index referenced, 0 for constant trees.
    int max_variable() const;
    bool depends_on_variables() const { return max_variable() > 0; }
    std::size_t node_count() const;

    friend bool operator==(const Expr& a, const Expr& b);

private:
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

struct Node {
    NodeKind kind;
    double value = 0.0;
    int var = 0;
    BinaryOp op = BinaryOp::Add;
    Function fn = Function::Sin;
    std::vector<Expr> children;
    int max_var = 0;
    std::size_t size = 1;
};

Expr parse(std::string_view text, int dim);

// Exact partial derivative with respect to x_var. Applies constant folding and
// the trivial identities (0+a, 1*a, ...); no further simplification.
Expr differentiate(const Expr& e, int var);

// Sum of d f_d / d x_d.
Expr divergence(std::span<const Expr> f);

// Requires point.size() >= e.max_variable(). Domain errors propagate as NaN/inf.
double evaluate(const Expr& e, std::span<const double> point);

// Text that parses back to a structurally equal tree (Sign prints as sign(),
// which is display-only).
std::string to_string(const Expr& e);

std::string_view function_name(Function fn);

// Flat stack-machine form of an expression. Produces bit-identical results to
// evaluate() and adds a batched entry point for evaluating many points at once.
class Program {
public:
    Program() = default;
    explicit Program(const Expr& e);

    double operator()(std::span<const double> point) const;

    // columns[d] points at n values of x_{d+1}. Writes n results to out.
    void eval_batch(std::span<const double* const> columns, std::size_t n, double* out,
                    std::vector<double>& scratch) const;

    bool is_constant() const { return max_var_ == 0; }

private:
    enum class Code : unsigned char { Const, Load, Neg, Add, Sub, Mul, Div, Pow, Call };
    struct Instr {
        Code code;
        Function fn;
        int var;
        double value;
    };
    void emit(const Expr& e, int& depth);

    std::vector<Instr> code_;
    int max_depth_ = 0;
    int max_var_ = 0;
};

double apply(Function fn, double x);

// Signal-observation model: dx = f(x) dt + dv,  dy = h(x) dt + dw.
struct ModelSpec {
    int dim = 0;
    int obs_dim = 0;
    std::vector<Expr> f;
    std::vector<Expr> h;

    // Parses every text under `dim`; obs_dim = h_texts.size().
    static ModelSpec from_text(int dim, const std::vector<std::string>& f_texts,
                               const std::vector<std::string>& h_texts);
    void validate() const;
};

} // namespace yauyau::expr
