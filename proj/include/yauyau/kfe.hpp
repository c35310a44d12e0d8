#pragma once

// One fine step of the Kolmogorov forward equation
//   du/dt = 1/2 Lap u - f . grad u - (div f + 1/2 |h|^2) u
// with homogeneous Dirichlet boundaries, split as
//   w  = u - dt [ sum_d f_d * D_d u + r u ]      (explicit, central differences)
//   u' = (I - dt/2 L_h)^{-1} w                    (implicit, diagonal in DST-I)
// where r = div f + 1/2 |h|^2 and L_h is the Kronecker-sum discrete Laplacian.

#include "yauyau/dst.hpp"
#include "yauyau/expr.hpp"
#include "yauyau/grid.hpp"

#include <string>
#include <vector>

namespace yauyau {

// Lambda[k1..kD] = 1 / (1 + dt/2 * sum_d (4/ds^2) sin^2(k_d pi / (2(Ns+1)))),
// laid out in the grid's row-major order.
struct SpectralDiffusion {
    int dim = 0;
    std::size_t ns = 0;
    double dt = 0.0;
    double ds = 0.0;
    std::vector<double> factors;
};

SpectralDiffusion compute_lambda(int dim, std::size_t ns, double dt, double ds);

// Eigenvalues (4/ds^2) sin^2(k pi / (2(Ns+1))), k = 1..Ns, of the 1-D operator
// -(1/ds^2) tridiag(1, -2, 1).
std::vector<double> laplacian_eigenvalues(std::size_t ns, double ds);

// How the reaction term enters the explicit half. Explicit is the factor
// 1 - dt r. Exponential uses exp(-dt r), which agrees to first order and stays
// positive where dt r > 1. Auto picks Explicit unless some node has dt r > 1.
enum class ReactionScheme { Auto, Explicit, Exponential };

struct DriftReactionOperator {
    int dim = 0;
    std::size_t ns = 0;
    double dt = 0.0;
    double ds = 0.0;
    std::vector<std::vector<double>> drift; // drift[d][node] = f_d(s)
    std::vector<double> reaction;           // div f + 1/2 |h|^2

    // Precomputed step coefficients.
    std::vector<std::vector<double>> drift_coef; // dt f_d / (2 ds)
    std::vector<bool> drift_active;              // false when f_d == 0 on every node
    std::vector<double> keep;                    // 1 - dt r, or exp(-dt r)
    ReactionScheme scheme = ReactionScheme::Explicit; // as resolved

    double max_abs_drift = 0.0;
    double max_abs_reaction = 0.0;

    // Non-empty when dt max|f| / ds > 1 or dt max|r| > 1: the explicit part can
    // amplify. Informational only.
    std::string stability_warning;
};

// Throws NonFiniteError naming the node coordinates if any coefficient is not
// finite.
DriftReactionOperator build_operator(const expr::ModelSpec& model, const SpatialGrid& grid, double dt,
                                     ReactionScheme scheme = ReactionScheme::Auto);

// Holds transform state and scratch so repeated steps allocate nothing.
class KfeStepper {
public:
    KfeStepper(const SpatialGrid& grid, const DriftReactionOperator& op, const SpectralDiffusion& lambda,
               DstPath path = DstPath::Auto);

    // In place. Throws NonFiniteError (index = node) if the result is not finite.
    void step(std::span<double> u);

    // Explicit half only: w = (I + dt C) u.
    void explicit_part(std::span<const double> u, std::span<double> w) const;
    // Implicit half only, in place.
    void implicit_part(std::span<double> w);

private:
    const SpatialGrid* grid_;
    const DriftReactionOperator* op_;
    SineTransform transform_;
    std::vector<double> scaled_factors_; // Lambda times the inverse-transform scale
    std::vector<double> work_;
    std::vector<double> zeros_;
    std::vector<double> scratch_;
};

DensityField kfe_step(const DensityField& u, const DriftReactionOperator& op, const SpectralDiffusion& lambda,
                      const SpatialGrid& grid, double dt);

} // namespace yauyau
