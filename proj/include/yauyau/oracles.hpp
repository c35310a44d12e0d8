#pragma once

// Reference filters used to score the engine. Not part of the filtering API.

#include "yauyau/expr.hpp"
#include "yauyau/matrix.hpp"
#include "yauyau/sde.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace yauyau::oracle {

// f(x) = A x + a, h(x) = C x + c.
struct AffineModel {
    std::size_t dim = 0;
    std::size_t obs_dim = 0;
    Matrix A; // D x D
    std::vector<double> a;
    Matrix C; // M x D
    std::vector<double> c;
};

// Reads A, a, C, c off the symbolic derivatives. Throws ConfigError if any
// f or h is not affine.
AffineModel extract_affine(const expr::ModelSpec& model);

struct KalmanOptions {
    double process_noise = 1.0; // scale on the state noise variance dt
    double prior_variance = 1.0;
};

struct KalmanResult {
    Matrix means;     // (Ntau+1) x D
    Matrix variances; // (Ntau+1) x D, diagonal of the posterior covariance
};

// Exact conditional mean of the Euler-discretised system the simulator draws
// from. The state is augmented with the observation accumulated since the last
// coarse time; at each coarse time that accumulator is observed without noise
// and reset. Throws Error if a covariance loses positive definiteness.
KalmanResult kalman_oracle(const AffineModel& model, const Matrix& observations, const TimeGrid& tg,
                           std::span<const double> prior_mean, const KalmanOptions& options = {});

struct ParticleOptions {
    std::size_t particles = 5000;
    std::uint64_t seed = 1;
    double prior_sigma = 1.0; // initial cloud N(x0, sigma^2 I)
};

// Bootstrap filter: Euler-Maruyama over each observation interval, weights
// proportional to exp(h.dy - |h|^2 dtau / 2) at the interval end, systematic
// resampling every step. Row k is the weighted mean after the k-th update.
// Throws DensityCollapse naming the step when every weight underflows.
Matrix particle_oracle(const expr::ModelSpec& model, const Matrix& observations, const TimeGrid& tg,
                       std::span<const double> x0, const ParticleOptions& options = {});

} // namespace yauyau::oracle
