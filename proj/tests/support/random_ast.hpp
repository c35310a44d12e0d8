#pragma once

// Random expression generators for property tests.

#include "yauyau/expr.hpp"

#include <random>

namespace yauyau::testing {

using expr::BinaryOp;
using expr::Expr;
using expr::Function;

// Any tree the grammar can express (round-trip tests).
class AnyAstGenerator {
public:
    AnyAstGenerator(std::uint64_t seed, int dim) : rng_(seed), dim_(dim) {}

    Expr operator()(int depth) {
        std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 5);
        switch (pick(rng_)) {
        case 0: return Expr::variable(std::uniform_int_distribution<int>(1, dim_)(rng_));
        case 1: return Expr::constant(constant());
        case 2: return Expr::negate((*this)(depth - 1));
        case 3: {
            std::uniform_int_distribution<int> op(0, 4);
            return Expr::binary(static_cast<BinaryOp>(op(rng_)), (*this)(depth - 1), (*this)(depth - 1));
        }
        default: {
            std::uniform_int_distribution<int> fn(0, 6);
            return Expr::call(static_cast<Function>(fn(rng_)), (*this)(depth - 1));
        }
        }
    }

private:
    double constant() {
        std::uniform_int_distribution<int> style(0, 3);
        switch (style(rng_)) {
        case 0: return static_cast<double>(std::uniform_int_distribution<int>(0, 9)(rng_));
        case 1: return std::uniform_real_distribution<double>(-5.0, 5.0)(rng_);
        case 2: return std::uniform_real_distribution<double>(-1e-7, 1e-7)(rng_);
        default: return std::uniform_real_distribution<double>(1e5, 1e9)(rng_);
        }
    }

    std::mt19937_64 rng_;
    int dim_;
};

// Smooth trees with moderate values on [-1, 1]^D: divisions are by 1.5 + g^2,
// log/sqrt act on 1 + g^2, exp on a bounded argument, powers are small.
class SmoothAstGenerator {
public:
    SmoothAstGenerator(std::uint64_t seed, int dim) : rng_(seed), dim_(dim) {}

    Expr operator()(int depth) {
        if (depth <= 0 || coin(0.2)) return leaf();
        std::uniform_int_distribution<int> pick(0, 9);
        auto sub = [&] { return (*this)(depth - 1); };
        switch (pick(rng_)) {
        case 0: return Expr::binary(BinaryOp::Add, sub(), sub());
        case 1: return Expr::binary(BinaryOp::Sub, sub(), sub());
        case 2: return Expr::binary(BinaryOp::Mul, sub(), sub());
        case 3: return Expr::binary(BinaryOp::Div, sub(), positive(sub()));
        case 4: return Expr::binary(BinaryOp::Pow, sub(), Expr::constant(coin(0.5) ? 2.0 : 3.0));
        case 5: return Expr::binary(BinaryOp::Pow, positive(sub()), Expr::constant(coin(0.5) ? 0.5 : -1.5));
        case 6: return Expr::negate(sub());
        case 7: {
            std::uniform_int_distribution<int> fn(0, 2);
            const Function fns[] = {Function::Sin, Function::Cos, Function::Tanh};
            return Expr::call(fns[fn(rng_)], sub());
        }
        case 8: return Expr::call(Function::Exp, Expr::call(coin(0.5) ? Function::Sin : Function::Tanh, sub()));
        default: return Expr::call(coin(0.5) ? Function::Log : Function::Sqrt, positive(sub()));
        }
    }

private:
    bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

    Expr leaf() {
        if (coin(0.6)) return Expr::variable(std::uniform_int_distribution<int>(1, dim_)(rng_));
        return Expr::constant(std::uniform_real_distribution<double>(-2.0, 2.0)(rng_));
    }

    Expr positive(Expr g) {
        return Expr::binary(BinaryOp::Add, Expr::constant(1.5),
                            Expr::binary(BinaryOp::Pow, std::move(g), Expr::constant(2.0)));
    }

    std::mt19937_64 rng_;
    int dim_;
};

} // namespace yauyau::testing
