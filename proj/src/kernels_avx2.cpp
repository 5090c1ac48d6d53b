// Copyright 2026 The qpinn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// AVX2+FMA kernel variants. This is the only translation unit compiled with
// -mavx2; nothing here may be called unless the dispatcher confirmed CPU
// support. A Dual is two 32-byte lanes, [v g0 g1 g2] and [h0 h1 h2 pad],
// with pad kept at zero so whole-lane arithmetic is safe.

#if defined(QPINN_BUILD_AVX2)

#include <immintrin.h>

#include "qpinn/kernels.hpp"

namespace qpinn {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void affine_forward_avx2(const double* W, const double* b, const Dual* x,
                         Dual* y, int m, int k, bool spatial) {
    if (spatial) {
        for (int i = 0; i < m; ++i) {
            const double* w = W + static_cast<std::size_t>(i) * k;
            __m256d acc1 = _mm256_set_pd(0.0, 0.0, 0.0, b[i]);
            __m256d acc2 = _mm256_setzero_pd();
            for (int j = 0; j < k; ++j) {
                const __m256d wj = _mm256_set1_pd(w[j]);
                acc1 = _mm256_fmadd_pd(wj, _mm256_load_pd(x[j].d), acc1);
                acc2 = _mm256_fmadd_pd(wj, _mm256_load_pd(x[j].d + 4), acc2);
            }
            _mm256_store_pd(y[i].d, acc1);
            _mm256_store_pd(y[i].d + 4, acc2);
        }
    } else {
        for (int i = 0; i < m; ++i) {
            const double* w = W + static_cast<std::size_t>(i) * k;
            double acc = b[i];
            for (int j = 0; j < k; ++j) acc += w[j] * x[j].d[0];
            y[i] = Dual(acc);
        }
    }
}

void affine_backward_avx2(const double* W, const Dual* x, const Dual* ybar,
                          Dual* xbar, double* Wbar, double* bbar, int m,
                          int k, bool spatial) {
    if (spatial) {
        for (int i = 0; i < m; ++i) {
            const double* w = W + static_cast<std::size_t>(i) * k;
            double* wb = Wbar + static_cast<std::size_t>(i) * k;
            const __m256d yb1 = _mm256_load_pd(ybar[i].d);
            const __m256d yb2 = _mm256_load_pd(ybar[i].d + 4);
            bbar[i] += ybar[i].d[0];
            for (int j = 0; j < k; ++j) {
                const __m256d wj = _mm256_set1_pd(w[j]);
                __m256d x1 = _mm256_load_pd(xbar[j].d);
                __m256d x2 = _mm256_load_pd(xbar[j].d + 4);
                x1 = _mm256_fmadd_pd(wj, yb1, x1);
                x2 = _mm256_fmadd_pd(wj, yb2, x2);
                _mm256_store_pd(xbar[j].d, x1);
                _mm256_store_pd(xbar[j].d + 4, x2);
                __m256d p = _mm256_mul_pd(yb1, _mm256_load_pd(x[j].d));
                p = _mm256_fmadd_pd(yb2, _mm256_load_pd(x[j].d + 4), p);
                wb[j] += hsum(p);
            }
        }
    } else {
        for (int i = 0; i < m; ++i) {
            const double* w = W + static_cast<std::size_t>(i) * k;
            double* wb = Wbar + static_cast<std::size_t>(i) * k;
            const double yb = ybar[i].d[0];
            for (int j = 0; j < k; ++j) {
                xbar[j].d[0] += w[j] * yb;
                wb[j] += yb * x[j].d[0];
            }
            bbar[i] += yb;
        }
    }
}

// lane masks: keep lanes 1..3 of the first register / 0..2 of the second.
// Built inside functions, not at file scope: static initializers in this TU
// would execute AVX instructions before the dispatcher checked the CPU.
inline __m256d mask_g() {
    return _mm256_castsi256_pd(_mm256_set_epi64x(-1, -1, -1, 0));
}
inline __m256d mask_h() {
    return _mm256_castsi256_pd(_mm256_set_epi64x(0, -1, -1, -1));
}

void silu_forward_avx2(const Dual* x, Dual* y, int n, bool spatial) {
    if (!spatial) {
        for (int i = 0; i < n; ++i) y[i] = Dual(silu(x[i].d[0]));
        return;
    }
    for (int i = 0; i < n; ++i) {
        const UnaryDerivs u = unary_derivs(UnaryOp::Silu, x[i].d[0]);
        const __m256d r1 = _mm256_load_pd(x[i].d);
        const __m256d r2 = _mm256_load_pd(x[i].d + 4);
        // [f0, f1*g0, f1*g1, f1*g2]
        __m256d out1 = _mm256_mul_pd(_mm256_set1_pd(u.f1), r1);
        out1 = _mm256_blend_pd(out1, _mm256_set1_pd(u.f0), 0x1);
        // g shifted to lanes 0..2, then f2*g^2 + f1*h
        const __m256d g = _mm256_permute4x64_pd(r1, 0xF9);  // [g0 g1 g2 g2]
        __m256d out2 = _mm256_mul_pd(_mm256_mul_pd(g, g), _mm256_set1_pd(u.f2));
        out2 = _mm256_fmadd_pd(_mm256_set1_pd(u.f1), r2, out2);
        out2 = _mm256_and_pd(out2, mask_h());
        _mm256_store_pd(y[i].d, out1);
        _mm256_store_pd(y[i].d + 4, out2);
    }
}

void silu_backward_avx2(const Dual* x, const Dual* ybar, Dual* xbar, int n,
                        bool spatial) {
    if (!spatial) {
        for (int i = 0; i < n; ++i) {
            const UnaryDerivs u = unary_derivs(UnaryOp::Silu, x[i].d[0]);
            xbar[i].d[0] += ybar[i].d[0] * u.f1;
        }
        return;
    }
    for (int i = 0; i < n; ++i) {
        const UnaryDerivs u = unary_derivs(UnaryOp::Silu, x[i].d[0]);
        const __m256d r1 = _mm256_load_pd(x[i].d);
        const __m256d r2 = _mm256_load_pd(x[i].d + 4);
        const __m256d yb1 = _mm256_load_pd(ybar[i].d);
        const __m256d yb2 = _mm256_load_pd(ybar[i].d + 4);
        const __m256d g = _mm256_permute4x64_pd(r1, 0xF9);      // g at 0..2
        const __m256d ybg = _mm256_permute4x64_pd(yb1, 0xF9);   // ybar.g at 0..2
        const __m256d f1 = _mm256_set1_pd(u.f1);
        const __m256d f2 = _mm256_set1_pd(u.f2);

        // xbar.g += ybar.g*f1 + 2*ybar.h*f2*g   (computed in lanes 0..2)
        // xbar.h += ybar.h*f1
        __m256d add_g = _mm256_fmadd_pd(
            _mm256_mul_pd(_mm256_set1_pd(2.0 * u.f2), g), yb2,
            _mm256_mul_pd(ybg, f1));
        __m256d add_h = _mm256_and_pd(_mm256_mul_pd(yb2, f1), mask_h());

        // value adjoint: f1*yb.v + f2*sum(yb.g*g) + sum(yb.h*(f3*g^2 + f2*h))
        __m256d hterm = _mm256_fmadd_pd(_mm256_mul_pd(g, g),
                                        _mm256_set1_pd(u.f3),
                                        _mm256_mul_pd(f2, r2));
        hterm = _mm256_and_pd(hterm, mask_h());
        double av = u.f1 * ybar[i].d[0] +
                    u.f2 * hsum(_mm256_and_pd(_mm256_mul_pd(ybg, g), mask_h())) +
                    hsum(_mm256_mul_pd(yb2, hterm));

        // scatter add_g (lanes 0..2) back to lanes 1..3 and merge
        const __m256d add_g_shift = _mm256_permute4x64_pd(add_g, 0x90);  // [x g0 g1 g2]
        __m256d x1 = _mm256_load_pd(xbar[i].d);
        __m256d x2 = _mm256_load_pd(xbar[i].d + 4);
        x1 = _mm256_add_pd(x1, _mm256_and_pd(add_g_shift, mask_g()));
        x2 = _mm256_add_pd(x2, add_h);
        _mm256_store_pd(xbar[i].d, x1);
        _mm256_store_pd(xbar[i].d + 4, x2);
        xbar[i].d[0] += av;
    }
}

double dot_avx2(const double* a, const double* b, int n) {
    __m256d acc = _mm256_setzero_pd();
    int i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                              acc);
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, int n) {
    const __m256d va = _mm256_set1_pd(alpha);
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                    _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, v);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scal_avx2(double alpha, double* x, int n) {
    const __m256d va = _mm256_set1_pd(alpha);
    int i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= alpha;
}

void adam_update_avx2(double* params, double* m, double* v,
                      const double* grad, int n, double lr, double beta1,
                      double beta2, double eps, double bias1, double bias2) {
    const __m256d vb1 = _mm256_set1_pd(beta1);
    const __m256d vb2 = _mm256_set1_pd(beta2);
    const __m256d vc1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d vc2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d vib1 = _mm256_set1_pd(1.0 / bias1);
    const __m256d vib2 = _mm256_set1_pd(1.0 / bias2);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d g = _mm256_loadu_pd(grad + i);
        __m256d mi = _mm256_fmadd_pd(vb1, _mm256_loadu_pd(m + i),
                                     _mm256_mul_pd(vc1, g));
        __m256d vi = _mm256_fmadd_pd(vb2, _mm256_loadu_pd(v + i),
                                     _mm256_mul_pd(vc2, _mm256_mul_pd(g, g)));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        const __m256d mh = _mm256_mul_pd(mi, vib1);
        const __m256d vh = _mm256_mul_pd(vi, vib2);
        const __m256d den = _mm256_add_pd(_mm256_sqrt_pd(vh), veps);
        const __m256d upd = _mm256_div_pd(_mm256_mul_pd(vlr, mh), den);
        _mm256_storeu_pd(params + i,
                         _mm256_sub_pd(_mm256_loadu_pd(params + i), upd));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
        params[i] -= lr * (m[i] / bias1) / (std::sqrt(v[i] / bias2) + eps);
    }
}

}  // namespace

const KernelTable kAvx2Kernels = {
    affine_forward_avx2, affine_backward_avx2, silu_forward_avx2,
    silu_backward_avx2,  dot_avx2,             axpy_avx2,
    scal_avx2,           adam_update_avx2,     "avx2",
};

}  // namespace qpinn

#endif  // QPINN_BUILD_AVX2
