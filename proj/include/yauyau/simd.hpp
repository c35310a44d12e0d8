#pragma once

// Data-parallel inner loops used by the transform, the step operator and the
// density reductions. Every kernel has a scalar reference and optional
// AVX2+FMA / NEON variants; the variant is picked once at runtime from CPU
// support, or forced through YAUYAU_SIMD=scalar|avx2|neon.
//
// Variants agree with the scalar reference to rounding: elementwise kernels
// may differ by fused multiply-add rounding, reductions by summation order.

#include <cstddef>
#include <string_view>

namespace yauyau::simd {

enum class Isa { Scalar, Avx2, Neon };

struct Kernels {
    Isa isa;
    const char* name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum)(const double* a, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // out = a * b (elementwise)
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    // x *= alpha
    void (*scale)(double alpha, double* x, std::size_t n);
    // out -= c * (plus - minus)
    void (*stencil_sub)(const double* c, const double* plus, const double* minus, double* out,
                        std::size_t n);
};

const Kernels& scalar_kernels();

// Compiled in and supported by the running CPU.
bool supported(Isa isa);
const Kernels& kernels_for(Isa isa); // throws if unsupported

// The process-wide selection.
const Kernels& active();
void select(Isa isa);

std::string_view isa_name(Isa isa);
Isa parse_isa(std::string_view name);

namespace detail {
const Kernels* avx2_table();
const Kernels* neon_table();
} // namespace detail

} // namespace yauyau::simd
