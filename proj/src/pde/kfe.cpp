#include "yauyau/errors.hpp"
#include "yauyau/kfe.hpp"
#include "yauyau/simd.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace yauyau {

std::vector<double> laplacian_eigenvalues(std::size_t ns, double ds) {
    std::vector<double> mu(ns);
    const double c = 4.0 / (ds * ds);
    for (std::size_t k = 1; k <= ns; ++k) {
        double s = std::sin(static_cast<double>(k) * std::numbers::pi / (2.0 * static_cast<double>(ns + 1)));
        mu[k - 1] = c * s * s;
    }
    return mu;
}

SpectralDiffusion compute_lambda(int dim, std::size_t ns, double dt, double ds) {
    if (dim < 1 || ns < 1 || !(dt > 0.0) || !(ds > 0.0)) {
        throw std::invalid_argument("compute_lambda: all arguments must be positive");
    }
    const auto mu = laplacian_eigenvalues(ns, ds);
    SpectralDiffusion out{dim, ns, dt, ds, {}};

    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= ns;
    out.factors.resize(total);

    // Accumulate the eigenvalue sum by walking the multi-index odometer.
    std::vector<std::size_t> idx(static_cast<std::size_t>(dim), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        double sum = 0.0;
        for (std::size_t k : idx) sum += mu[k];
        out.factors[flat] = 1.0 / (1.0 + 0.5 * dt * sum);
        for (int d = dim - 1; d >= 0; --d) {
            if (++idx[static_cast<std::size_t>(d)] < ns) break;
            idx[static_cast<std::size_t>(d)] = 0;
        }
    }
    return out;
}

DriftReactionOperator build_operator(const expr::ModelSpec& model, const SpatialGrid& grid, double dt,
                                     ReactionScheme scheme) {
    model.validate();
    if (model.dim != grid.dim()) throw std::invalid_argument("model and grid dimensions differ");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");

    const auto D = static_cast<std::size_t>(model.dim);
    const std::size_t n = grid.size();

    std::vector<expr::Program> f, h;
    for (const auto& e : model.f) f.emplace_back(e);
    for (const auto& e : model.h) h.emplace_back(e);
    const expr::Program div(expr::divergence(model.f));

    DriftReactionOperator op;
    op.dim = model.dim;
    op.ns = grid.ns();
    op.dt = dt;
    op.ds = grid.ds();
    op.drift.assign(D, std::vector<double>(n));
    op.reaction.resize(n);

    std::vector<double> x(D);
    auto report = [&](std::size_t node, const char* what) {
        std::ostringstream msg;
        msg << "non-finite " << what << " at node (";
        for (std::size_t d = 0; d < D; ++d) msg << (d ? ", " : "") << x[d];
        msg << ")";
        throw NonFiniteError(msg.str(), node);
    };

    for (std::size_t i = 0; i < n; ++i) {
        grid.point(i, x);
        for (std::size_t d = 0; d < D; ++d) {
            double v = f[d](x);
            if (!std::isfinite(v)) report(i, "drift");
            op.drift[d][i] = v;
            op.max_abs_drift = std::max(op.max_abs_drift, std::fabs(v));
        }
        double r = div(x);
        for (const auto& hj : h) {
            double v = hj(x);
            r += 0.5 * v * v;
        }
        if (!std::isfinite(r)) report(i, "reaction coefficient");
        op.reaction[i] = r;
        op.max_abs_reaction = std::max(op.max_abs_reaction, std::fabs(r));
    }

    const double c = dt / (2.0 * grid.ds());
    op.drift_coef.assign(D, std::vector<double>(n));
    op.drift_active.assign(D, false);
    for (std::size_t d = 0; d < D; ++d) {
        for (std::size_t i = 0; i < n; ++i) {
            op.drift_coef[d][i] = c * op.drift[d][i];
            if (op.drift[d][i] != 0.0) op.drift_active[d] = true;
        }
    }
    double max_reaction = 0.0;
    for (double r : op.reaction) max_reaction = std::max(max_reaction, r);
    if (scheme == ReactionScheme::Auto)
        scheme = dt * max_reaction > 1.0 ? ReactionScheme::Exponential : ReactionScheme::Explicit;
    op.scheme = scheme;
    op.keep.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        op.keep[i] = scheme == ReactionScheme::Exponential ? std::exp(-dt * op.reaction[i]) : 1.0 - dt * op.reaction[i];

    const double cfl_drift = dt * op.max_abs_drift / grid.ds();
    const double cfl_reaction = dt * op.max_abs_reaction;
    if (cfl_drift > 1.0 || cfl_reaction > 1.0) {
        std::ostringstream msg;
        msg << "explicit drift/reaction step may amplify: dt*max|f|/ds = " << cfl_drift
            << ", dt*max|r| = " << cfl_reaction;
        if (op.scheme == ReactionScheme::Exponential) msg << "; reaction applied as exp(-dt r)";
        op.stability_warning = msg.str();
    }
    return op;
}

KfeStepper::KfeStepper(const SpatialGrid& grid, const DriftReactionOperator& op, const SpectralDiffusion& lambda,
                       DstPath path)
    : grid_(&grid), op_(&op), transform_(grid.ns(), path) {
    if (op.dim != grid.dim() || op.ns != grid.ns() || lambda.dim != grid.dim() || lambda.ns != grid.ns()) {
        throw std::invalid_argument("operator, spectral factors and grid are inconsistent");
    }
    if (op.dt != lambda.dt || op.ds != grid.ds() || lambda.ds != grid.ds()) {
        throw std::invalid_argument("operator and spectral factors were built for different dt/ds");
    }
    const double scale = std::pow(2.0 / static_cast<double>(grid.ns() + 1), grid.dim());
    scaled_factors_.resize(lambda.factors.size());
    for (std::size_t i = 0; i < scaled_factors_.size(); ++i) scaled_factors_[i] = lambda.factors[i] * scale;
    work_.resize(grid.size());
    zeros_.assign(grid.stride(0), 0.0);
}

void KfeStepper::explicit_part(std::span<const double> u, std::span<double> w) const {
    const auto& K = simd::active();
    const std::size_t n = grid_->ns();
    const std::size_t total = grid_->size();
    const double* zero = zeros_.data();

    K.mul(op_->keep.data(), u.data(), w.data(), total);

    for (int axis = 0; axis < grid_->dim(); ++axis) {
        const auto a = static_cast<std::size_t>(axis);
        if (!op_->drift_active[a]) continue;
        const double* c = op_->drift_coef[a].data();
        const std::size_t s = grid_->stride(axis);
        const std::size_t block = n * s;
        for (std::size_t b = 0; b < total; b += block) {
            // First row has no lower neighbour, last row no upper one.
            K.stencil_sub(c + b, u.data() + b + s, zero, w.data() + b, s);
            if (n > 2) {
                const std::size_t o = b + s;
                K.stencil_sub(c + o, u.data() + o + s, u.data() + o - s, w.data() + o, (n - 2) * s);
            }
            const std::size_t last = b + (n - 1) * s;
            K.stencil_sub(c + last, zero, u.data() + last - s, w.data() + last, s);
        }
    }
}

void KfeStepper::implicit_part(std::span<double> w) {
    transform_.apply_all(w.data(), grid_->dim(), scratch_);
    simd::active().mul(scaled_factors_.data(), w.data(), w.data(), w.size());
    transform_.apply_all(w.data(), grid_->dim(), scratch_);
}

void KfeStepper::step(std::span<double> u) {
    if (u.size() != grid_->size()) throw std::invalid_argument("field length does not match the grid");
    explicit_part(u, work_);
    implicit_part(work_);
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!std::isfinite(work_[i])) throw NonFiniteError("non-finite density value at node " + std::to_string(i), i);
    }
    std::copy(work_.begin(), work_.end(), u.begin());
}

DensityField kfe_step(const DensityField& u, const DriftReactionOperator& op, const SpectralDiffusion& lambda,
                      const SpatialGrid& grid, double dt) {
    if (dt != op.dt) throw std::invalid_argument("dt differs from the one the operator was built for");
    KfeStepper stepper(grid, op, lambda);
    DensityField out{u.values, false};
    stepper.step(out.values);
    return out;
}

} // namespace yauyau
