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

/**
 * @file
 * Data-parallel inner-loop kernels with runtime SIMD dispatch.
 *
 * Every kernel exists as a scalar reference implementation and, on x86-64
 * with AVX2+FMA, a vectorized variant. The active table is chosen once per
 * process from CPUID, overridable with the QPINN_SIMD environment variable
 * ("scalar" or "avx2") or force_simd_level(); scalar and SIMD variants are
 * equivalence-tested against each other.
 *
 * Affine kernels act on arrays of Dual (value + 3 first + 3 second spatial
 * derivatives). When `spatial` is false only the value lane is touched; the
 * payload lanes of the outputs are left zeroed.
 */

#pragma once

#include <cstddef>

#include "qpinn/dual.hpp"

namespace qpinn {

enum class SimdLevel { Scalar, Avx2 };

struct KernelTable {
    // y[i] = sum_j W[i*k+j] * x[j] + b[i], i < m. Derivative payloads ride
    // along: the weights are spatial constants, so every lane scales alike.
    void (*affine_forward)(const double* W, const double* b, const Dual* x,
                           Dual* y, int m, int k, bool spatial);

    // Transposed-Jacobian accumulation for the affine map:
    //   xbar[j]     += sum_i W[i*k+j] * ybar[i]        (per lane)
    //   Wbar[i*k+j] += <ybar[i], x[j]>                 (dot over lanes)
    //   bbar[i]     += ybar[i].value()
    void (*affine_backward)(const double* W, const Dual* x, const Dual* ybar,
                            Dual* xbar, double* Wbar, double* bbar, int m,
                            int k, bool spatial);

    // y[i] = silu(x[i]) with the unary chain rule on the payload lanes.
    void (*silu_forward)(const Dual* x, Dual* y, int n, bool spatial);

    // xbar[i] += J_silu(x[i])^T ybar[i]; recomputes the derivative tables.
    void (*silu_backward)(const Dual* x, const Dual* ybar, Dual* xbar, int n,
                          bool spatial);

    double (*dot)(const double* a, const double* b, int n);
    void (*axpy)(double alpha, const double* x, double* y, int n);
    void (*scal)(double alpha, double* x, int n);

    // In-place bias-corrected Adam update. bias1/bias2 are 1 - beta^t.
    void (*adam_update)(double* params, double* m, double* v,
                        const double* grad, int n, double lr, double beta1,
                        double beta2, double eps, double bias1, double bias2);

    const char* name;
};

extern const KernelTable kScalarKernels;
#if defined(QPINN_BUILD_AVX2)
extern const KernelTable kAvx2Kernels;
#endif

/// The table selected for this process (CPUID + QPINN_SIMD override).
const KernelTable& active_kernels();

/// Direct table lookup (equivalence tests); nullptr when the level is not
/// compiled in or the CPU lacks it.
const KernelTable* kernel_table(SimdLevel level);

SimdLevel simd_level();
bool simd_available(SimdLevel level);

/// Test hook: pins the dispatch to a specific level. Throws if unavailable.
void force_simd_level(SimdLevel level);

}  // namespace qpinn
