#include "glc/kernels.hpp"

#include <cmath>

namespace glc::kernels {
namespace {

double dot_scalar(const double* a, const double* b, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

double l1_norm_scalar(const double* v, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += std::fabs(v[i]);
    return acc;
}

double l2_norm_sq_scalar(const double* v, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += v[i] * v[i];
    return acc;
}

double max_abs_scalar(const double* v, size_t n) {
    double m = 0.0;
    for (size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(v[i]));
    return m;
}

void prox_l1_nonneg_scalar(const double* v, double t, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = std::max(v[i] - t, 0.0);
}

void prox_l1_box01_scalar(const double* v, double t, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = std::min(std::max(v[i] - t, 0.0), 1.0);
}

void row_sums_scalar(const double* theta, const int32_t* idx, const int64_t* offsets,
                     size_t rows, double* z) {
    for (size_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (int64_t k = offsets[r]; k < offsets[r + 1]; ++k) acc += theta[idx[k]];
        z[r] = acc;
    }
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops table = {
        dot_scalar,           axpy_scalar,           l1_norm_scalar,
        l2_norm_sq_scalar,    max_abs_scalar,        prox_l1_nonneg_scalar,
        prox_l1_box01_scalar, row_sums_scalar,
    };
    return table;
}

void scatter_add(const double* c, const int32_t* idx, const int64_t* offsets,
                 size_t rows, double* g) {
    for (size_t r = 0; r < rows; ++r) {
        const double cr = c[r];
        if (cr == 0.0) continue;
        for (int64_t k = offsets[r]; k < offsets[r + 1]; ++k) g[idx[k]] += cr;
    }
}

}  // namespace glc::kernels
