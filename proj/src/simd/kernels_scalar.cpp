#include "yauyau/simd.hpp"

namespace yauyau::simd {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_scalar(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_scalar(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void stencil_sub_scalar(const double* c, const double* plus, const double* minus, double* out,
                        std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] -= c[i] * (plus[i] - minus[i]);
}

constexpr Kernels kScalar{Isa::Scalar, "scalar",   dot_scalar,  sum_scalar,
                          axpy_scalar, mul_scalar, scale_scalar, stencil_sub_scalar};

} // namespace

const Kernels& scalar_kernels() { return kScalar; }

} // namespace yauyau::simd
