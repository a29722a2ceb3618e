#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "glc/kernels.hpp"
#include "glc/parallel.hpp"
#include "glc/rng.hpp"

using namespace glc;

namespace {

struct Fixture {
    std::vector<double> a, b;
    std::vector<int32_t> idx;
    std::vector<int64_t> offsets;

    explicit Fixture(size_t n, uint64_t seed) {
        Rng rng(seed);
        a.resize(n);
        b.resize(n);
        for (size_t i = 0; i < n; ++i) {
            a[i] = rng.uniform(-3.0, 3.0);
            b[i] = rng.uniform(-3.0, 3.0);
        }
        // CSR block with ragged rows over a universe of n indices
        offsets.push_back(0);
        const int rows = 17;
        for (int r = 0; r < rows; ++r) {
            const int len = static_cast<int>(rng.uniform_int(10));
            for (int k = 0; k < len; ++k)
                idx.push_back(static_cast<int32_t>(rng.uniform_int(n)));
            offsets.push_back(static_cast<int64_t>(idx.size()));
        }
    }
    size_t rows() const { return offsets.size() - 1; }
};

}  // namespace

TEST_CASE("scalar kernels match straightforward references") {
    Fixture f(103, 7);
    const auto& ops = kernels::scalar_ops();
    const size_t n = f.a.size();

    double dot_ref = 0.0, l1_ref = 0.0, l2_ref = 0.0, max_ref = 0.0;
    for (size_t i = 0; i < n; ++i) {
        dot_ref += f.a[i] * f.b[i];
        l1_ref += std::fabs(f.a[i]);
        l2_ref += f.a[i] * f.a[i];
        max_ref = std::max(max_ref, std::fabs(f.a[i]));
    }
    CHECK(ops.dot(f.a.data(), f.b.data(), n) == doctest::Approx(dot_ref).epsilon(1e-14));
    CHECK(ops.l1_norm(f.a.data(), n) == doctest::Approx(l1_ref).epsilon(1e-14));
    CHECK(ops.l2_norm_sq(f.a.data(), n) == doctest::Approx(l2_ref).epsilon(1e-14));
    CHECK(ops.max_abs(f.a.data(), n) == max_ref);

    std::vector<double> y = f.b;
    ops.axpy(0.37, f.a.data(), y.data(), n);
    for (size_t i = 0; i < n; ++i) CHECK(y[i] == f.b[i] + 0.37 * f.a[i]);

    std::vector<double> out(n);
    ops.prox_l1_nonneg(f.a.data(), 0.5, out.data(), n);
    for (size_t i = 0; i < n; ++i) CHECK(out[i] == std::max(f.a[i] - 0.5, 0.0));
    ops.prox_l1_box01(f.a.data(), 0.5, out.data(), n);
    for (size_t i = 0; i < n; ++i)
        CHECK(out[i] == std::min(std::max(f.a[i] - 0.5, 0.0), 1.0));

    std::vector<double> z(f.rows());
    ops.row_sums(f.a.data(), f.idx.data(), f.offsets.data(), f.rows(), z.data());
    for (size_t r = 0; r < f.rows(); ++r) {
        double acc = 0.0;
        for (int64_t k = f.offsets[r]; k < f.offsets[r + 1]; ++k) acc += f.a[f.idx[k]];
        CHECK(z[r] == doctest::Approx(acc).epsilon(1e-14));
    }
}

TEST_CASE("scatter_add accumulates row coefficients into the gradient") {
    Fixture f(29, 11);
    std::vector<double> c(f.rows());
    Rng rng(3);
    for (auto& v : c) v = rng.uniform(-1.0, 1.0);
    c[0] = 0.0;  // exercised skip path

    std::vector<double> g(29, 0.0), g_ref(29, 0.0);
    kernels::scatter_add(c.data(), f.idx.data(), f.offsets.data(), f.rows(), g.data());
    for (size_t r = 0; r < f.rows(); ++r)
        for (int64_t k = f.offsets[r]; k < f.offsets[r + 1]; ++k) g_ref[f.idx[k]] += c[r];
    for (size_t i = 0; i < 29; ++i) CHECK(g[i] == doctest::Approx(g_ref[i]).epsilon(1e-14));
}

#if defined(GLC_HAVE_AVX2_BUILD)
TEST_CASE("avx2 kernels agree with scalar" *
          doctest::skip(!kernels::cpu_has_avx2())) {
    const auto& sc = kernels::scalar_ops();
    const auto& vx = kernels::avx2_ops();

    // deliberately awkward lengths: 0, sub-width, multiples, stragglers
    for (size_t n : {size_t{0}, size_t{1}, size_t{3}, size_t{4}, size_t{8}, size_t{13},
                     size_t{64}, size_t{257}}) {
        Fixture f(n == 0 ? 1 : n, 1000 + n);
        f.a.resize(n);
        f.b.resize(n);

        // reductions: same up to reassociation roundoff
        CHECK(vx.dot(f.a.data(), f.b.data(), n) ==
              doctest::Approx(sc.dot(f.a.data(), f.b.data(), n)).epsilon(1e-12));
        CHECK(vx.l1_norm(f.a.data(), n) ==
              doctest::Approx(sc.l1_norm(f.a.data(), n)).epsilon(1e-12));
        CHECK(vx.l2_norm_sq(f.a.data(), n) ==
              doctest::Approx(sc.l2_norm_sq(f.a.data(), n)).epsilon(1e-12));
        CHECK(vx.max_abs(f.a.data(), n) == sc.max_abs(f.a.data(), n));

        // elementwise: bit-identical (no FMA in the vector path)
        std::vector<double> y1 = f.b, y2 = f.b;
        sc.axpy(-0.77, f.a.data(), y1.data(), n);
        vx.axpy(-0.77, f.a.data(), y2.data(), n);
        CHECK(y1 == y2);

        std::vector<double> o1(n), o2(n);
        sc.prox_l1_nonneg(f.a.data(), 0.21, o1.data(), n);
        vx.prox_l1_nonneg(f.a.data(), 0.21, o2.data(), n);
        CHECK(o1 == o2);
        sc.prox_l1_box01(f.a.data(), 0.21, o1.data(), n);
        vx.prox_l1_box01(f.a.data(), 0.21, o2.data(), n);
        CHECK(o1 == o2);
    }

    Fixture f(301, 77);
    std::vector<double> z1(f.rows()), z2(f.rows());
    sc.row_sums(f.a.data(), f.idx.data(), f.offsets.data(), f.rows(), z1.data());
    vx.row_sums(f.a.data(), f.idx.data(), f.offsets.data(), f.rows(), z2.data());
    for (size_t r = 0; r < f.rows(); ++r)
        CHECK(z1[r] == doctest::Approx(z2[r]).epsilon(1e-12));
}
#endif

TEST_CASE("isa dispatch honors overrides") {
    CHECK(kernels::isa_name(kernels::Isa::scalar) == "scalar");
    CHECK(kernels::isa_name(kernels::Isa::avx2) == "avx2");
    kernels::set_isa(kernels::Isa::scalar);
    CHECK(kernels::active_isa() == kernels::Isa::scalar);
    CHECK(kernels::ops().dot == kernels::scalar_ops().dot);
#if defined(GLC_HAVE_AVX2_BUILD)
    if (kernels::cpu_has_avx2()) {
        kernels::set_isa(kernels::Isa::avx2);
        CHECK(kernels::active_isa() == kernels::Isa::avx2);
        kernels::set_isa(kernels::Isa::scalar);
    }
#endif
}

TEST_CASE("seed derivation separates paths and orders") {
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
    CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
    CHECK(derive_seed(5, {0}) == derive_seed(5, {0}));
    CHECK(derive_seed(5, {}) != derive_seed(5, {0}));
}

TEST_CASE("rng draws are deterministic and in range") {
    Rng r1(42), r2(42);
    for (int i = 0; i < 1000; ++i) {
        const double u = r1.uniform();
        CHECK(u == r2.uniform());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    Rng r3(43);
    for (int i = 0; i < 1000; ++i) {
        const uint64_t v = r3.uniform_int(7);
        CHECK(v < 7);
    }
    // bernoulli(p) empirical sanity at generous tolerance
    Rng r4(44);
    int hits = 0;
    for (int i = 0; i < 20000; ++i) hits += r4.bernoulli(0.3) ? 1 : 0;
    CHECK(std::fabs(hits / 20000.0 - 0.3) < 0.02);
}

TEST_CASE("parallel_for covers every index once and propagates exceptions") {
    std::vector<int> hits(1000, 0);
    parallel_for(1000, 4, [&](int64_t i) { hits[i] += 1; });
    CHECK(std::accumulate(hits.begin(), hits.end(), 0) == 1000);
    CHECK(*std::min_element(hits.begin(), hits.end()) == 1);

    CHECK_THROWS_AS(parallel_for(16, 3,
                                 [](int64_t i) {
                                     if (i == 7) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
}
