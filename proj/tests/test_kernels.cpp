/// Scalar reference kernels vs the AVX2 variants: same inputs, matching
/// results. FMA contraction changes rounding, so comparisons use a tight
/// relative tolerance rather than bit equality.

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "qpinn/kernels.hpp"
#include "support/fd.hpp"

using namespace qpinn;
using qpinn::test::mixed_err;

namespace {

Dual random_dual(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Dual d;
    for (int i = 0; i < 7; ++i) d.d[i] = u(rng);
    return d;
}

std::vector<Dual> random_duals(std::mt19937_64& rng, int n) {
    std::vector<Dual> v(n);
    for (Dual& d : v) d = random_dual(rng);
    return v;
}

std::vector<double> random_reals(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

void check_duals_close(const std::vector<Dual>& a, const std::vector<Dual>& b,
                       double tol) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (int l = 0; l < 7; ++l)
            CHECK(mixed_err(a[i].d[l], b[i].d[l], 1e-12) < tol);
}

void check_reals_close(const std::vector<double>& a,
                       const std::vector<double>& b, double tol) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(mixed_err(a[i], b[i], 1e-12) < tol);
}

}  // namespace

TEST_SUITE_BEGIN("kernels");

TEST_CASE("dispatch reports a usable table") {
    const KernelTable& kt = active_kernels();
    CHECK(kt.name != nullptr);
    CHECK(simd_available(SimdLevel::Scalar));
}

TEST_CASE("scalar and AVX2 kernels agree") {
    if (!simd_available(SimdLevel::Avx2)) {
        MESSAGE("AVX2 unavailable on this host; equivalence suite skipped");
        return;
    }
    const KernelTable& s = *kernel_table(SimdLevel::Scalar);
    const KernelTable& v = *kernel_table(SimdLevel::Avx2);
    std::mt19937_64 rng(123);
    const double tol = 1e-13;

    for (const bool spatial : {true, false}) {
        CAPTURE(spatial);
        const std::vector<std::pair<int, int>> shapes = {
            {1, 1}, {3, 7}, {16, 64}, {64, 64}, {4, 16}, {5, 3}};
        for (const auto& [m, k] : shapes) {
            CAPTURE(m);
            CAPTURE(k);
            const auto W = random_reals(rng, m * k);
            const auto b = random_reals(rng, m);
            const auto x = random_duals(rng, k);

            std::vector<Dual> ys(m), yv(m);
            s.affine_forward(W.data(), b.data(), x.data(), ys.data(), m, k,
                             spatial);
            v.affine_forward(W.data(), b.data(), x.data(), yv.data(), m, k,
                             spatial);
            check_duals_close(ys, yv, tol);
            for (int i = 0; i < m; ++i) CHECK(yv[i].d[7] == 0.0);

            const auto ybar = random_duals(rng, m);
            auto xbar_s = random_duals(rng, k);  // pre-filled: += semantics
            auto xbar_v = xbar_s;
            auto Wbar_s = random_reals(rng, m * k);
            auto Wbar_v = Wbar_s;
            auto bbar_s = random_reals(rng, m);
            auto bbar_v = bbar_s;
            s.affine_backward(W.data(), x.data(), ybar.data(), xbar_s.data(),
                              Wbar_s.data(), bbar_s.data(), m, k, spatial);
            v.affine_backward(W.data(), x.data(), ybar.data(), xbar_v.data(),
                              Wbar_v.data(), bbar_v.data(), m, k, spatial);
            check_duals_close(xbar_s, xbar_v, tol);
            check_reals_close(Wbar_s, Wbar_v, tol);
            check_reals_close(bbar_s, bbar_v, tol);
        }

        const int n = 101;
        const auto x = random_duals(rng, n);
        std::vector<Dual> ys(n), yv(n);
        s.silu_forward(x.data(), ys.data(), n, spatial);
        v.silu_forward(x.data(), yv.data(), n, spatial);
        check_duals_close(ys, yv, tol);

        const auto ybar = random_duals(rng, n);
        auto xbar_s = random_duals(rng, n);
        auto xbar_v = xbar_s;
        s.silu_backward(x.data(), ybar.data(), xbar_s.data(), n, spatial);
        v.silu_backward(x.data(), ybar.data(), xbar_v.data(), n, spatial);
        check_duals_close(xbar_s, xbar_v, tol);
    }

    for (const int n : {1, 4, 7, 256, 1023}) {
        CAPTURE(n);
        const auto a = random_reals(rng, n);
        const auto b = random_reals(rng, n);
        CHECK(mixed_err(s.dot(a.data(), b.data(), n),
                        v.dot(a.data(), b.data(), n), 1e-12) < tol);

        auto ys = random_reals(rng, n);
        auto yv = ys;
        s.axpy(0.37, a.data(), ys.data(), n);
        v.axpy(0.37, a.data(), yv.data(), n);
        check_reals_close(ys, yv, tol);

        auto xs = random_reals(rng, n);
        auto xv = xs;
        s.scal(-1.91, xs.data(), n);
        v.scal(-1.91, xv.data(), n);
        check_reals_close(xs, xv, tol);

        auto ps = random_reals(rng, n);
        auto pv = ps;
        auto ms = random_reals(rng, n);
        auto mv = ms;
        auto vs = random_reals(rng, n);
        for (double& t : vs) t = std::abs(t);
        auto vv = vs;
        const auto g = random_reals(rng, n);
        s.adam_update(ps.data(), ms.data(), vs.data(), g.data(), n, 1e-3, 0.9,
                      0.999, 1e-8, 0.1, 0.001);
        v.adam_update(pv.data(), mv.data(), vv.data(), g.data(), n, 1e-3, 0.9,
                      0.999, 1e-8, 0.1, 0.001);
        check_reals_close(ps, pv, tol);
        check_reals_close(ms, mv, tol);
        check_reals_close(vs, vv, tol);
    }
}

TEST_CASE("force_simd_level round trip") {
    const SimdLevel before = simd_level();
    force_simd_level(SimdLevel::Scalar);
    CHECK(simd_level() == SimdLevel::Scalar);
    CHECK(active_kernels().name == std::string("scalar"));
    if (simd_available(SimdLevel::Avx2)) {
        force_simd_level(SimdLevel::Avx2);
        CHECK(active_kernels().name == std::string("avx2"));
    }
    force_simd_level(before);
}

TEST_SUITE_END();
