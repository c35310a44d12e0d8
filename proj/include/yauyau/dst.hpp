#pragma once

// Type-I discrete sine transform, unnormalised:
//   S[k] = sum_{j=1..N} v[j] sin(j k pi / (N+1)),  k = 1..N
// Its inverse is (2/(N+1)) times the forward transform.

#include "yauyau/grid.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace yauyau {

enum class DstPath {
    Auto,  // naive up to kNaiveDstLimit, FFT above
    Naive, // O(N^2) against a precomputed sine table
    Fft,   // FFTW RODFT00 (odd extension of length 2(N+1))
};

inline constexpr std::size_t kNaiveDstLimit = 64;

// Direct double-sum definition; the correctness reference.
std::vector<double> dst_1d_reference(std::span<const double> v);

std::vector<double> dst_1d(std::span<const double> v, DstPath path = DstPath::Auto);
std::vector<double> idst_1d(std::span<const double> s, DstPath path = DstPath::Auto);

// Reusable transform of fixed length N applied along one axis of a row-major
// array with N points per axis. Shareable across threads; per-call scratch is
// supplied by the caller.
class SineTransform {
public:
    explicit SineTransform(std::size_t n, DstPath path = DstPath::Auto);

    std::size_t n() const noexcept { return n_; }
    DstPath path() const noexcept { return path_; }

    // Unnormalised forward transform of every line along `axis`, in place.
    void apply_axis(double* data, int dim, int axis, std::vector<double>& scratch) const;
    void apply_all(double* data, int dim, std::vector<double>& scratch) const;

private:
    struct FftPlan;
    void line_naive(const double* in, double* out) const;

    std::size_t n_;
    DstPath path_;
    std::vector<double> table_; // table_[k*n + j] = sin((j+1)(k+1) pi / (n+1))
    std::shared_ptr<FftPlan> plan_;
};

// Applies the 1-D transform along every axis in the given order (default
// 0..D-1). With inverse set, the result is scaled by (2/(N+1))^D.
DensityField dst_nd(const DensityField& field, const SpatialGrid& grid, bool inverse,
                    DstPath path = DstPath::Auto, std::span<const int> axis_order = {});

} // namespace yauyau
