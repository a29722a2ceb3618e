// AVX2 variants of the dense kernels. Built with -mavx2 only (no FMA): the
// elementwise kernels must round exactly like the scalar reference so that
// dispatch never changes solver iterates. Reductions use four independent
// accumulators and agree with the scalar path only up to reassociation.

#include "glc/kernels.hpp"

#if defined(GLC_HAVE_AVX2_BUILD)

#include <immintrin.h>

#include <cmath>

namespace glc::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        acc1 = _mm256_add_pd(acc1,
                             _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

double l1_norm_avx2(const double* v, size_t n) {
    const __m256d signmask = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_andnot_pd(signmask, _mm256_loadu_pd(v + i)));
    double s = hsum(acc);
    for (; i < n; ++i) s += std::fabs(v[i]);
    return s;
}

double l2_norm_sq_avx2(const double* v, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d x = _mm256_loadu_pd(v + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(x, x));
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += v[i] * v[i];
    return s;
}

double max_abs_avx2(const double* v, size_t n) {
    const __m256d signmask = _mm256_set1_pd(-0.0);
    __m256d vm = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        vm = _mm256_max_pd(vm, _mm256_andnot_pd(signmask, _mm256_loadu_pd(v + i)));
    __m128d lo = _mm256_castpd256_pd128(vm);
    __m128d hi = _mm256_extractf128_pd(vm, 1);
    lo = _mm_max_pd(lo, hi);
    double m = _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
    for (; i < n; ++i) m = std::max(m, std::fabs(v[i]));
    return m;
}

void prox_l1_nonneg_avx2(const double* v, double t, double* out, size_t n) {
    const __m256d vt = _mm256_set1_pd(t);
    const __m256d zero = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_sub_pd(_mm256_loadu_pd(v + i), vt), zero));
    for (; i < n; ++i) out[i] = std::max(v[i] - t, 0.0);
}

void prox_l1_box01_avx2(const double* v, double t, double* out, size_t n) {
    const __m256d vt = _mm256_set1_pd(t);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d x = _mm256_max_pd(_mm256_sub_pd(_mm256_loadu_pd(v + i), vt), zero);
        _mm256_storeu_pd(out + i, _mm256_min_pd(x, one));
    }
    for (; i < n; ++i) out[i] = std::min(std::max(v[i] - t, 0.0), 1.0);
}

void row_sums_avx2(const double* theta, const int32_t* idx, const int64_t* offsets,
                   size_t rows, double* z) {
    for (size_t r = 0; r < rows; ++r) {
        const int64_t begin = offsets[r], end = offsets[r + 1];
        int64_t k = begin;
        __m256d acc = _mm256_setzero_pd();
        for (; k + 4 <= end; k += 4) {
            __m128i ids = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + k));
            acc = _mm256_add_pd(acc, _mm256_i32gather_pd(theta, ids, 8));
        }
        double s = hsum(acc);
        for (; k < end; ++k) s += theta[idx[k]];
        z[r] = s;
    }
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops table = {
        dot_avx2,           axpy_avx2,           l1_norm_avx2, l2_norm_sq_avx2,
        max_abs_avx2,       prox_l1_nonneg_avx2, prox_l1_box01_avx2,
        row_sums_avx2,
    };
    return table;
}

}  // namespace glc::kernels

#endif  // GLC_HAVE_AVX2_BUILD
