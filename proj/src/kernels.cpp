#include "glc/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "glc/errors.hpp"

namespace glc::kernels {
namespace {

Isa g_isa = Isa::scalar;
bool g_initialized = false;

Isa detect() {
#if defined(GLC_HAVE_AVX2_BUILD)
    const char* env = std::getenv("GLC_KERNELS");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
        if (std::strcmp(env, "avx2") == 0) {
            if (!cpu_has_avx2()) throw param_error("GLC_KERNELS=avx2 but the CPU lacks AVX2");
            return Isa::avx2;
        }
        if (std::strcmp(env, "auto") != 0)
            throw param_error(std::string("unknown GLC_KERNELS value: ") + env);
    }
    return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
#else
    return Isa::scalar;
#endif
}

void ensure_initialized() {
    if (!g_initialized) {
        g_isa = detect();
        g_initialized = true;
    }
}

}  // namespace

bool cpu_has_avx2() {
#if defined(GLC_HAVE_AVX2_BUILD)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

const Ops& ops() {
    ensure_initialized();
#if defined(GLC_HAVE_AVX2_BUILD)
    if (g_isa == Isa::avx2) return avx2_ops();
#endif
    return scalar_ops();
}

Isa active_isa() {
    ensure_initialized();
    return g_isa;
}

void set_isa(Isa isa) {
    if (isa == Isa::avx2 && !cpu_has_avx2())
        throw param_error("cannot select AVX2 kernels: unsupported on this CPU");
    g_isa = isa;
    g_initialized = true;
}

std::string isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace glc::kernels
