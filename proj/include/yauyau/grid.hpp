#pragma once

#include "yauyau/matrix.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace yauyau {

inline constexpr std::size_t kDefaultNodeBudget = 2'000'000;

// Node budget from YAUYAU_NODE_BUDGET, or kDefaultNodeBudget.
std::size_t node_budget_from_env();

// Uniform tensor grid with the same Ns interior nodes on every axis:
// node i (0-based) of any axis sits at lo + i*ds. Values outside
// [lo - ds, lo + Ns*ds] are taken as zero (homogeneous Dirichlet).
//
// Flattening is row-major with axis 0 slowest:
//   flat = sum_d i_d * Ns^(D-1-d)
class SpatialGrid {
public:
    SpatialGrid() = default;

    int dim() const noexcept { return dim_; }
    std::size_t ns() const noexcept { return ns_; }
    double ds() const noexcept { return ds_; }
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return lo_ + static_cast<double>(ns_ - 1) * ds_; } // last node
    std::size_t size() const noexcept { return size_; }
    double cell_volume() const noexcept { return cell_volume_; }

    std::size_t stride(int axis) const noexcept { return strides_[static_cast<std::size_t>(axis)]; }
    double coord(std::size_t i) const noexcept { return nodes_[i]; }
    std::span<const double> nodes() const noexcept { return nodes_; }

    std::size_t flatten(std::span<const std::size_t> multi) const;
    std::vector<std::size_t> unflatten(std::size_t flat) const;
    // Coordinates of node `flat` written to out (length D).
    void point(std::size_t flat, std::span<double> out) const;

    friend SpatialGrid build_grid(int dim, std::span<const double> lo, std::span<const double> hi,
                                  double ds, std::size_t node_budget);

private:
    int dim_ = 0;
    std::size_t ns_ = 0;
    double ds_ = 0.0;
    double lo_ = 0.0;
    std::size_t size_ = 0;
    double cell_volume_ = 0.0;
    std::vector<std::size_t> strides_;
    std::vector<double> nodes_;
};

// Nodes lo, lo+ds, ... up to hi (inclusive, to 1e-9 of a step) over the common
// hull of the per-axis bounds. Requires hi-lo >= 2 ds. Throws CapacityError
// when Ns^D exceeds node_budget.
SpatialGrid build_grid(int dim, std::span<const double> lo, std::span<const double> hi, double ds,
                       std::size_t node_budget = node_budget_from_env());

// [min(x), max(x) + ds] over every entry of a state path.
std::pair<double, double> data_driven_bounds(const Matrix& states, double ds);

struct DensityField {
    std::vector<double> values;
    bool normalized = false;

    std::size_t size() const noexcept { return values.size(); }
};

// Sum of values times cell volume.
double discrete_mass(const DensityField& u, const SpatialGrid& grid);

} // namespace yauyau
