#include "yauyau/errors.hpp"
#include "yauyau/filter.hpp"
#include "yauyau/kfe.hpp"
#include "yauyau/simd.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace yauyau {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void normalize_in_place(std::span<double> u, double cell_volume, std::size_t index) {
    const auto& K = simd::active();
    const double mass = K.sum(u.data(), u.size()) * cell_volume;
    if (!(mass > 0.0) || !std::isfinite(mass)) {
        throw DensityCollapse("density collapse at observation " + std::to_string(index) +
                                  ": discrete mass is " + std::to_string(mass),
                              index);
    }
    K.scale(1.0 / mass, u.data(), u.size());
}

void update_in_place(std::span<double> u, const ObservationTable& h, std::span<const double> dy,
                     double cell_volume, std::size_t index, std::vector<double>& exponent) {
    if (dy.size() != h.obs_dim) throw std::invalid_argument("observation increment has the wrong length");
    if (u.size() != h.nodes) throw std::invalid_argument("field length does not match the observation table");
    const auto& K = simd::active();
    exponent.assign(u.size(), 0.0);
    for (std::size_t j = 0; j < h.obs_dim; ++j) {
        K.axpy(dy[j], h.values.data() + j * h.nodes, exponent.data(), h.nodes);
    }
    const double shift = *std::max_element(exponent.begin(), exponent.end());
    if (!std::isfinite(shift)) {
        throw DensityCollapse("non-finite observation exponent at observation " + std::to_string(index), index);
    }
    for (std::size_t i = 0; i < u.size(); ++i) u[i] *= std::exp(exponent[i] - shift);
    normalize_in_place(u, cell_volume, index);
}

void mean_in_place(std::span<const double> u, const SpatialGrid& grid, std::span<double> out,
                   std::vector<double>& marginal) {
    const auto& K = simd::active();
    const std::size_t n = grid.ns();
    for (int axis = 0; axis < grid.dim(); ++axis) {
        const std::size_t s = grid.stride(axis);
        const std::size_t block = n * s;
        marginal.assign(n, 0.0);
        for (std::size_t b = 0; b < u.size(); b += block) {
            for (std::size_t j = 0; j < n; ++j) marginal[j] += K.sum(u.data() + b + j * s, s);
        }
        out[static_cast<std::size_t>(axis)] = K.dot(marginal.data(), grid.nodes().data(), n) * grid.cell_volume();
    }
}

} // namespace

DensityField initial_density(const SpatialGrid& grid, const InitialDensity& kind) {
    DensityField u;
    u.values.resize(grid.size());
    if (kind.kind == InitKind::Uniform) {
        std::fill(u.values.begin(), u.values.end(), 1.0);
    } else {
        if (!(kind.sigma > 0.0)) throw ConfigError("init.sigma", "must be positive");
        if (kind.center.size() != static_cast<std::size_t>(grid.dim())) {
            throw ConfigError("init.center", "length must equal the grid dimension");
        }
        for (double c : kind.center) {
            if (!(c >= grid.lo() && c <= grid.hi())) {
                throw ConfigError("init.center", "Gaussian centre lies outside the grid bounds");
            }
        }
        std::vector<double> x(static_cast<std::size_t>(grid.dim()));
        const double inv = 1.0 / (2.0 * kind.sigma * kind.sigma);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            grid.point(i, x);
            double r2 = 0.0;
            for (std::size_t d = 0; d < x.size(); ++d) r2 += (x[d] - kind.center[d]) * (x[d] - kind.center[d]);
            u.values[i] = std::exp(-r2 * inv);
        }
    }
    normalize_in_place(u.values, grid.cell_volume(), 0);
    u.normalized = true;
    return u;
}

ObservationTable tabulate_observations(const expr::ModelSpec& model, const SpatialGrid& grid) {
    if (model.dim != grid.dim()) throw std::invalid_argument("model and grid dimensions differ");
    ObservationTable t;
    t.obs_dim = static_cast<std::size_t>(model.obs_dim);
    t.nodes = grid.size();
    t.values.resize(t.obs_dim * t.nodes);
    std::vector<double> x(static_cast<std::size_t>(grid.dim()));
    for (std::size_t j = 0; j < t.obs_dim; ++j) {
        const expr::Program h(model.h[j]);
        for (std::size_t i = 0; i < t.nodes; ++i) {
            grid.point(i, x);
            double v = h(x);
            if (!std::isfinite(v)) {
                throw NonFiniteError("non-finite observation function h" + std::to_string(j + 1) + " at node " +
                                         std::to_string(i),
                                     i);
            }
            t.values[j * t.nodes + i] = v;
        }
    }
    return t;
}

DensityField observation_update(const DensityField& u, const ObservationTable& h, std::span<const double> dy,
                                const SpatialGrid& grid, std::size_t index) {
    DensityField out{u.values, true};
    std::vector<double> exponent;
    update_in_place(out.values, h, dy, grid.cell_volume(), index, exponent);
    return out;
}

DensityField normalize(const DensityField& u, double ds, int dim, std::size_t index) {
    DensityField out{u.values, true};
    normalize_in_place(out.values, std::pow(ds, dim), index);
    return out;
}

DensityField normalize(const DensityField& u, const SpatialGrid& grid, std::size_t index) {
    DensityField out{u.values, true};
    normalize_in_place(out.values, grid.cell_volume(), index);
    return out;
}

std::vector<double> estimate_mean(const DensityField& u, const SpatialGrid& grid) {
    if (u.size() != grid.size()) throw std::invalid_argument("field length does not match the grid");
    std::vector<double> out(static_cast<std::size_t>(grid.dim()));
    std::vector<double> marginal;
    mean_in_place(u.values, grid, out, marginal);
    return out;
}

std::vector<std::size_t> snapshot_indices(std::size_t ntau, std::size_t count) {
    std::vector<std::size_t> ks;
    if (count == 0) return ks;
    if (count == 1) return {ntau};
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t k = (i * ntau) / (count - 1);
        if (ks.empty() || ks.back() != k) ks.push_back(k);
    }
    return ks;
}

FilterResult run_filter(const expr::ModelSpec& model, const TimeGrid& tg, const SpatialGrid& grid,
                        const Matrix& observations, const DensityField& init, const FilterOptions& options) {
    model.validate();
    if (observations.rows() != tg.ntau + 1) {
        throw std::invalid_argument("observation path must have Ntau + 1 rows");
    }
    if (observations.cols() != static_cast<std::size_t>(model.obs_dim)) {
        throw std::invalid_argument("observation path width differs from the observation dimension");
    }
    if (init.size() != grid.size()) throw std::invalid_argument("initial density does not match the grid");

    FilterResult result;
    const auto op = build_operator(model, grid, tg.dt, options.reaction);
    if (!op.stability_warning.empty()) result.warnings.push_back(op.stability_warning);
    const auto lambda = compute_lambda(grid.dim(), grid.ns(), tg.dt, grid.ds());
    const auto table = tabulate_observations(model, grid);
    KfeStepper stepper(grid, op, lambda, options.dst_path);

    const auto D = static_cast<std::size_t>(grid.dim());
    const std::size_t M = observations.cols();
    result.estimates = Matrix(tg.ntau + 1, D);

    std::vector<double> u = init.values;
    normalize_in_place(u, grid.cell_volume(), 0);

    std::vector<double> exponent, marginal, dy(M);
    mean_in_place(u, grid, result.estimates.row(0), marginal);

    const auto snaps = snapshot_indices(tg.ntau, options.snapshot_count);
    auto next_snap = snaps.begin();
    auto maybe_snapshot = [&](std::size_t k) {
        if (next_snap != snaps.end() && *next_snap == k) {
            result.snapshots.push_back({k, tg.coarse_time(k), u});
            ++next_snap;
        }
    };
    maybe_snapshot(0);

    for (std::size_t k = 1; k <= tg.ntau; ++k) {
        if (options.cancel != nullptr && options.cancel->load(std::memory_order_relaxed)) throw Cancelled();

        auto t0 = Clock::now();
        for (std::size_t m = 0; m < tg.nt; ++m) {
            try {
                stepper.step(u);
            } catch (const NonFiniteError& e) {
                const std::size_t fine = (k - 1) * tg.nt + m;
                throw NonFiniteError("step failure at observation " + std::to_string(k) + ", fine step " +
                                         std::to_string(fine) + ": " + e.what(),
                                     fine);
            }
        }
        if (options.clip_negative) {
            for (double& v : u) v = v < 0.0 ? 0.0 : v;
        }
        result.timings.propagation += seconds_since(t0);

        t0 = Clock::now();
        for (std::size_t j = 0; j < M; ++j) dy[j] = observations(k, j) - observations(k - 1, j);
        update_in_place(u, table, dy, grid.cell_volume(), k, exponent);
        result.timings.update += seconds_since(t0);

        t0 = Clock::now();
        mean_in_place(u, grid, result.estimates.row(k), marginal);
        result.timings.estimation += seconds_since(t0);

        maybe_snapshot(k);
        if (options.on_update) options.on_update(k, DensityField{u, true});
        if (options.on_progress) options.on_progress(k, tg.ntau);
    }

    // Warn when the posterior mean sits within one cell of the domain edge:
    // mass is being lost through the Dirichlet boundary.
    const double lo = grid.lo(), hi = grid.hi();
    for (std::size_t k = 0; k < result.estimates.rows(); ++k) {
        for (double v : result.estimates.row(k)) {
            if (v < lo + grid.ds() || v > hi - grid.ds()) {
                result.warnings.push_back("estimate at observation " + std::to_string(k) +
                                          " is within one cell of the grid boundary");
                return result;
            }
        }
    }
    return result;
}

} // namespace yauyau
