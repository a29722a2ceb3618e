#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace glc::kernels {

// Dense vector and sparse-row primitives used by the solver's inner loops.
// Each operation has a scalar reference implementation and (on x86-64) an
// AVX2 variant; the active set is chosen once at startup from cpuid, and can
// be forced with the GLC_KERNELS environment variable ("scalar" or "avx2")
// or set_isa(). Elementwise kernels (axpy, prox_*) are bit-identical across
// implementations — the AVX2 code deliberately avoids FMA so rounding matches
// the scalar path. Reductions (dot, norms, row_sums) reassociate and agree
// only up to roundoff.

enum class Isa { scalar, avx2 };

struct Ops {
    double (*dot)(const double* a, const double* b, size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, size_t n);
    double (*l1_norm)(const double* v, size_t n);
    double (*l2_norm_sq)(const double* v, size_t n);
    double (*max_abs)(const double* v, size_t n);
    // out[i] = max(v[i] - t, 0)
    void (*prox_l1_nonneg)(const double* v, double t, double* out, size_t n);
    // out[i] = min(max(v[i] - t, 0), 1)
    void (*prox_l1_box01)(const double* v, double t, double* out, size_t n);
    // z[r] = sum of theta[idx[k]] over k in [offsets[r], offsets[r+1])
    void (*row_sums)(const double* theta, const int32_t* idx, const int64_t* offsets,
                     size_t rows, double* z);
};

const Ops& scalar_ops();
#if defined(GLC_HAVE_AVX2_BUILD)
const Ops& avx2_ops();
#endif

// Active implementation (dispatch decided on first use).
const Ops& ops();
Isa active_isa();
void set_isa(Isa isa);       // throws param_error if unsupported on this CPU
bool cpu_has_avx2();
std::string isa_name(Isa isa);

// g[idx[k]] += c[r] for every row r and k in its index range. Scatter with
// potential index collisions across lanes, so there is no vector variant;
// both dispatch tables share this implementation.
void scatter_add(const double* c, const int32_t* idx, const int64_t* offsets,
                 size_t rows, double* g);

}  // namespace glc::kernels
