#pragma once

#include "yauyau/dst.hpp"
#include "yauyau/expr.hpp"
#include "yauyau/grid.hpp"
#include "yauyau/kfe.hpp"
#include "yauyau/matrix.hpp"
#include "yauyau/sde.hpp"

#include <atomic>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace yauyau {

enum class InitKind { Uniform, Gaussian };

struct InitialDensity {
    InitKind kind = InitKind::Uniform;
    std::vector<double> center; // Gaussian only, length D
    double sigma = 1.0;
};

// Normalised to unit discrete mass. Gaussian: exp(-|s-c|^2 / (2 sigma^2)).
DensityField initial_density(const SpatialGrid& grid, const InitialDensity& kind);

// h_j evaluated at every node: values[j * grid.size() + node].
struct ObservationTable {
    std::size_t obs_dim = 0;
    std::size_t nodes = 0;
    std::vector<double> values;
};

ObservationTable tabulate_observations(const expr::ModelSpec& model, const SpatialGrid& grid);

// u_i <- exp(sum_j h_j(s_i) dy_j - K) u_i with K the maximum exponent, then
// normalised. `index` labels a DensityCollapse.
DensityField observation_update(const DensityField& u, const ObservationTable& h, std::span<const double> dy,
                                const SpatialGrid& grid, std::size_t index = 0);

DensityField normalize(const DensityField& u, double ds, int dim, std::size_t index = 0);
DensityField normalize(const DensityField& u, const SpatialGrid& grid, std::size_t index = 0);

// Conditional mean sum_i s_i u_i ds^D of a normalised field.
std::vector<double> estimate_mean(const DensityField& u, const SpatialGrid& grid);

struct DensitySnapshot {
    std::size_t k = 0;
    double tau = 0.0;
    std::vector<double> values;
};

struct PhaseTimings {
    double propagation = 0.0; // seconds
    double update = 0.0;
    double estimation = 0.0;
};

struct FilterResult {
    Matrix estimates;            // (Ntau+1) x D, row k = estimate at tau_k
    std::vector<double> errors;  // per-step RMSE over dimensions; empty without truth
    double rmse = 0.0;           // meaningful only when errors is non-empty
    PhaseTimings timings;
    std::vector<DensitySnapshot> snapshots;
    std::vector<std::string> warnings;
};

struct FilterOptions {
    std::size_t snapshot_count = 20;
    DstPath dst_path = DstPath::Auto;
    ReactionScheme reaction = ReactionScheme::Auto;
    // Zero negative values left by the central-difference drift before each
    // update, so the multiplicative update cannot amplify them.
    bool clip_negative = true;
    // Called after every observation update with (k, Ntau).
    std::function<void(std::size_t, std::size_t)> on_progress;
    // Called after every observation update with the normalised field.
    std::function<void(std::size_t, const DensityField&)> on_update;
    // Checked once per observation interval; throws Cancelled when set.
    const std::atomic<bool>* cancel = nullptr;
};

// Snapshot indices k retained for a given count: evenly spread over 0..Ntau,
// always including both ends when count >= 2.
std::vector<std::size_t> snapshot_indices(std::size_t ntau, std::size_t count);

// For k = 1..Ntau: Nt steps of the forward equation, the exponential update
// with y(tau_k) - y(tau_{k-1}), then the conditional mean.
FilterResult run_filter(const expr::ModelSpec& model, const TimeGrid& tg, const SpatialGrid& grid,
                        const Matrix& observations, const DensityField& init, const FilterOptions& options = {});

} // namespace yauyau
