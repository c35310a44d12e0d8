#include "yauyau/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace yauyau::simd {

namespace {

const Kernels* table_for(Isa isa) {
    switch (isa) {
    case Isa::Scalar: return &scalar_kernels();
    case Isa::Avx2: return detail::avx2_table();
    case Isa::Neon: return detail::neon_table();
    }
    return nullptr;
}

const Kernels* best_available() {
    if (const char* env = std::getenv("YAUYAU_SIMD")) {
        std::string_view want(env);
        if (!want.empty() && want != "auto") {
            const Kernels* k = table_for(parse_isa(want));
            if (k == nullptr) throw std::runtime_error("YAUYAU_SIMD=" + std::string(want) + " is not supported here");
            return k;
        }
    }
    if (const Kernels* k = detail::avx2_table()) return k;
    if (const Kernels* k = detail::neon_table()) return k;
    return &scalar_kernels();
}

std::atomic<const Kernels*>& current() {
    static std::atomic<const Kernels*> ptr{best_available()};
    return ptr;
}

} // namespace

bool supported(Isa isa) { return table_for(isa) != nullptr; }

const Kernels& kernels_for(Isa isa) {
    const Kernels* k = table_for(isa);
    if (k == nullptr) throw std::runtime_error(std::string(isa_name(isa)) + " kernels are not available");
    return *k;
}

const Kernels& active() { return *current().load(std::memory_order_acquire); }

void select(Isa isa) { current().store(&kernels_for(isa), std::memory_order_release); }

std::string_view isa_name(Isa isa) {
    switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
    }
    return "?";
}

Isa parse_isa(std::string_view name) {
    if (name == "scalar") return Isa::Scalar;
    if (name == "avx2") return Isa::Avx2;
    if (name == "neon") return Isa::Neon;
    throw std::invalid_argument("unknown instruction set '" + std::string(name) + "'");
}

} // namespace yauyau::simd
