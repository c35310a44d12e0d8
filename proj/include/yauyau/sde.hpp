#pragma once

#include "yauyau/expr.hpp"
#include "yauyau/matrix.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace yauyau {

// Nested time discretisation: Nt fine steps of length dt per observation
// interval dtau, Ntau observation intervals covering [0, T].
struct TimeGrid {
    double T = 0.0;
    double dt = 0.0;
    double dtau = 0.0;
    std::size_t nt = 0;
    std::size_t ntau = 0;

    std::size_t total_fine_steps() const noexcept { return nt * ntau; }
    double fine_time(std::size_t n) const noexcept { return static_cast<double>(n) * dt; }
    double coarse_time(std::size_t k) const noexcept { return static_cast<double>(k) * dtau; }

    // dtau/dt and T/dtau must be integral (to 1e-9 relative). The stored dtau
    // and T are then recomputed as nt*dt and ntau*dtau.
    static TimeGrid make(double T, double dt, double dtau);
};

// Gaussian stream over std::mt19937_64 seeded through std::seed_seq{seed_lo,
// seed_hi, stream}; normals by the Box-Muller transform on 53-bit uniforms in
// (0, 1]. All three pieces have exactly specified output, so a given
// (seed, stream) reproduces across platforms and standard libraries.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream);
    double next();
    double uniform(); // (0, 1]

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

struct SimulationOptions {
    double noise_scale = 1.0; // 0 turns both processes deterministic
    std::uint64_t state_stream = 1;
    std::uint64_t obs_stream = 2;
};

struct SimulatedPaths {
    Matrix states;       // (Ntau*Nt + 1) x D, row n = x(n dt)
    Matrix observations; // (Ntau + 1) x M, row k = y(k dtau), row 0 = 0
};

// Euler-Maruyama on the fine grid, observations recorded at coarse times.
// Throws NonFiniteError carrying the fine-step index if f or h (or the state)
// becomes non-finite.
SimulatedPaths simulate_paths(const expr::ModelSpec& model, const TimeGrid& tg,
                              std::span<const double> x0, std::uint64_t seed,
                              const SimulationOptions& options = {});

// Row k-1 holds y(tau_k) - y(tau_{k-1}).
Matrix observation_increments(const Matrix& observations);

// Rows 0, Nt, 2Nt, ... of a fine-grid state path.
Matrix coarse_states(const Matrix& states, const TimeGrid& tg);

} // namespace yauyau
