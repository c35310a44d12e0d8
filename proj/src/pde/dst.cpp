#include "yauyau/dst.hpp"
#include "yauyau/simd.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace yauyau {

namespace {

// The FFTW planner is not thread-safe; execution with new arrays is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::size_t pow_size(std::size_t base, int exp) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

} // namespace

struct SineTransform::FftPlan {
    fftw_plan plan = nullptr;
    explicit FftPlan(std::size_t n) {
        std::vector<double> in(n), out(n);
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_r2r_1d(static_cast<int>(n), in.data(), out.data(), FFTW_RODFT00,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan == nullptr) throw std::runtime_error("FFTW could not plan a DST-I of length " + std::to_string(n));
    }
    ~FftPlan() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
};

std::vector<double> dst_1d_reference(std::span<const double> v) {
    const std::size_t n = v.size();
    const double w = std::numbers::pi / static_cast<double>(n + 1);
    std::vector<double> s(n, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= n; ++j) acc += v[j - 1] * std::sin(static_cast<double>(j * k) * w);
        s[k - 1] = acc;
    }
    return s;
}

SineTransform::SineTransform(std::size_t n, DstPath path) : n_(n), path_(path) {
    if (n == 0) throw std::invalid_argument("transform length must be positive");
    if (path_ == DstPath::Auto) path_ = n <= kNaiveDstLimit ? DstPath::Naive : DstPath::Fft;
    if (path_ == DstPath::Naive) {
        // Reduce j*k modulo 2(N+1) so large products keep full accuracy.
        const std::size_t period = 2 * (n + 1);
        const double w = std::numbers::pi / static_cast<double>(n + 1);
        table_.resize(n * n);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t j = 0; j < n; ++j) {
                table_[k * n + j] = std::sin(static_cast<double>(((j + 1) * (k + 1)) % period) * w);
            }
        }
    } else {
        plan_ = std::make_shared<FftPlan>(n);
    }
}

void SineTransform::line_naive(const double* in, double* out) const {
    const auto& K = simd::active();
    for (std::size_t k = 0; k < n_; ++k) out[k] = K.dot(table_.data() + k * n_, in, n_);
}

void SineTransform::apply_axis(double* data, int dim, int axis, std::vector<double>& scratch) const {
    const std::size_t n = n_;
    const std::size_t inner = pow_size(n, dim - 1 - axis);
    const std::size_t outer = pow_size(n, axis);
    const std::size_t block = n * inner;
    const auto& K = simd::active();

    if (path_ == DstPath::Naive) {
        if (inner == 1) {
            scratch.resize(n);
            for (std::size_t b = 0; b < outer; ++b) {
                double* line = data + b * block;
                std::copy_n(line, n, scratch.data());
                line_naive(scratch.data(), line);
            }
        } else {
            // Rows of `inner` contiguous values: out_row_k = sum_j S[k][j] in_row_j.
            scratch.resize(block);
            for (std::size_t b = 0; b < outer; ++b) {
                double* base = data + b * block;
                std::fill(scratch.begin(), scratch.end(), 0.0);
                for (std::size_t k = 0; k < n; ++k) {
                    double* out_row = scratch.data() + k * inner;
                    for (std::size_t j = 0; j < n; ++j) {
                        K.axpy(table_[k * n + j], base + j * inner, out_row, inner);
                    }
                }
                std::copy(scratch.begin(), scratch.end(), base);
            }
        }
        return;
    }

    scratch.resize(2 * n);
    double* in = scratch.data();
    double* out = scratch.data() + n;
    for (std::size_t b = 0; b < outer; ++b) {
        double* base = data + b * block;
        for (std::size_t i = 0; i < inner; ++i) {
            for (std::size_t j = 0; j < n; ++j) in[j] = base[j * inner + i];
            fftw_execute_r2r(plan_->plan, in, out);
            // RODFT00 computes twice the unnormalised DST-I.
            for (std::size_t j = 0; j < n; ++j) base[j * inner + i] = 0.5 * out[j];
        }
    }
}

void SineTransform::apply_all(double* data, int dim, std::vector<double>& scratch) const {
    for (int axis = 0; axis < dim; ++axis) apply_axis(data, dim, axis, scratch);
}

std::vector<double> dst_1d(std::span<const double> v, DstPath path) {
    std::vector<double> out(v.begin(), v.end());
    if (out.empty()) return out;
    std::vector<double> scratch;
    SineTransform(out.size(), path).apply_axis(out.data(), 1, 0, scratch);
    return out;
}

std::vector<double> idst_1d(std::span<const double> s, DstPath path) {
    auto out = dst_1d(s, path);
    const double scale = 2.0 / static_cast<double>(s.size() + 1);
    for (double& x : out) x *= scale;
    return out;
}

DensityField dst_nd(const DensityField& field, const SpatialGrid& grid, bool inverse, DstPath path,
                    std::span<const int> axis_order) {
    if (field.size() != grid.size()) throw std::invalid_argument("field length does not match the grid");
    DensityField out{field.values, false};
    SineTransform t(grid.ns(), path);
    std::vector<double> scratch;
    if (axis_order.empty()) {
        t.apply_all(out.values.data(), grid.dim(), scratch);
    } else {
        if (axis_order.size() != static_cast<std::size_t>(grid.dim())) {
            throw std::invalid_argument("axis order must list every axis");
        }
        for (int axis : axis_order) {
            if (axis < 0 || axis >= grid.dim()) throw std::invalid_argument("axis out of range");
            t.apply_axis(out.values.data(), grid.dim(), axis, scratch);
        }
    }
    if (inverse) {
        const double scale = std::pow(2.0 / static_cast<double>(grid.ns() + 1), grid.dim());
        simd::active().scale(scale, out.values.data(), out.values.size());
    }
    return out;
}

} // namespace yauyau
