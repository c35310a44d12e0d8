#include "yauyau/errors.hpp"
#include "yauyau/grid.hpp"
#include "yauyau/simd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

namespace yauyau {

std::size_t node_budget_from_env() {
    if (const char* env = std::getenv("YAUYAU_NODE_BUDGET")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
        throw ConfigError("YAUYAU_NODE_BUDGET", "must be a positive integer");
    }
    return kDefaultNodeBudget;
}

SpatialGrid build_grid(int dim, std::span<const double> lo, std::span<const double> hi, double ds,
                       std::size_t node_budget) {
    if (dim < 1 || dim > 6) throw ConfigError("space.dim", "dimension must be in 1..6");
    if (lo.size() != static_cast<std::size_t>(dim) || hi.size() != static_cast<std::size_t>(dim)) {
        throw ConfigError("space.bounds", "one bound per dimension is required");
    }
    if (!(ds > 0.0) || !std::isfinite(ds)) throw ConfigError("space.ds", "must be positive and finite");

    double low = *std::min_element(lo.begin(), lo.end());
    double high = *std::max_element(hi.begin(), hi.end());
    for (std::size_t d = 0; d < lo.size(); ++d) {
        if (!std::isfinite(lo[d]) || !std::isfinite(hi[d]) || hi[d] - lo[d] < 2.0 * ds * (1.0 - 1e-12)) {
            throw ConfigError("space.bounds", "degenerate domain on axis " + std::to_string(d + 1) +
                                                  ": need hi - lo >= 2 ds");
        }
    }

    const double steps = std::floor((high - low) / ds + 1e-9);
    const auto ns = static_cast<std::size_t>(steps) + 1;

    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) {
        if (total > std::numeric_limits<std::size_t>::max() / ns || total * ns > node_budget) {
            throw CapacityError("grid with " + std::to_string(ns) + "^" + std::to_string(dim) +
                                " nodes exceeds the node budget of " + std::to_string(node_budget));
        }
        total *= ns;
    }

    SpatialGrid g;
    g.dim_ = dim;
    g.ns_ = ns;
    g.ds_ = ds;
    g.lo_ = low;
    g.size_ = total;
    g.cell_volume_ = std::pow(ds, dim);
    g.strides_.assign(static_cast<std::size_t>(dim), 1);
    for (int d = dim - 2; d >= 0; --d) {
        g.strides_[static_cast<std::size_t>(d)] = g.strides_[static_cast<std::size_t>(d) + 1] * ns;
    }
    g.nodes_.resize(ns);
    for (std::size_t i = 0; i < ns; ++i) g.nodes_[i] = low + static_cast<double>(i) * ds;
    return g;
}

std::size_t SpatialGrid::flatten(std::span<const std::size_t> multi) const {
    if (multi.size() != static_cast<std::size_t>(dim_)) throw std::invalid_argument("multi-index rank mismatch");
    std::size_t flat = 0;
    for (std::size_t d = 0; d < multi.size(); ++d) {
        if (multi[d] >= ns_) throw std::out_of_range("multi-index out of range");
        flat += multi[d] * strides_[d];
    }
    return flat;
}

std::vector<std::size_t> SpatialGrid::unflatten(std::size_t flat) const {
    if (flat >= size_) throw std::out_of_range("flat index out of range");
    std::vector<std::size_t> multi(static_cast<std::size_t>(dim_));
    for (std::size_t d = 0; d < multi.size(); ++d) {
        multi[d] = flat / strides_[d];
        flat %= strides_[d];
    }
    return multi;
}

void SpatialGrid::point(std::size_t flat, std::span<double> out) const {
    for (std::size_t d = 0; d < static_cast<std::size_t>(dim_); ++d) {
        out[d] = nodes_[flat / strides_[d]];
        flat %= strides_[d];
    }
}

std::pair<double, double> data_driven_bounds(const Matrix& states, double ds) {
    auto v = states.values();
    if (v.empty()) throw std::invalid_argument("empty state path");
    auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    return {*mn, *mx + ds};
}

double discrete_mass(const DensityField& u, const SpatialGrid& grid) {
    return simd::active().sum(u.values.data(), u.values.size()) * grid.cell_volume();
}

} // namespace yauyau
