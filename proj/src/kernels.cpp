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

#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "qpinn/kernels.hpp"

namespace qpinn {
namespace {

bool cpu_has_avx2() {
#if defined(QPINN_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* table_for(SimdLevel level) {
    switch (level) {
        case SimdLevel::Scalar:
            return &kScalarKernels;
        case SimdLevel::Avx2:
#if defined(QPINN_BUILD_AVX2)
            return &kAvx2Kernels;
#else
            return nullptr;
#endif
    }
    return nullptr;
}

struct Dispatch {
    const KernelTable* table;
    SimdLevel level;

    Dispatch() {
        level = cpu_has_avx2() ? SimdLevel::Avx2 : SimdLevel::Scalar;
        if (const char* env = std::getenv("QPINN_SIMD")) {
            if (std::strcmp(env, "scalar") == 0) {
                level = SimdLevel::Scalar;
            } else if (std::strcmp(env, "avx2") == 0) {
                if (!cpu_has_avx2())
                    throw std::runtime_error(
                        "QPINN_SIMD=avx2 requested but AVX2/FMA unavailable");
                level = SimdLevel::Avx2;
            } else {
                throw std::runtime_error(
                    std::string("unknown QPINN_SIMD value: ") + env);
            }
        }
        table = table_for(level);
    }
};

Dispatch& dispatch() {
    static Dispatch d;
    return d;
}

}  // namespace

const KernelTable& active_kernels() { return *dispatch().table; }

const KernelTable* kernel_table(SimdLevel level) {
    if (level == SimdLevel::Avx2 && !cpu_has_avx2()) return nullptr;
    return table_for(level);
}

SimdLevel simd_level() { return dispatch().level; }

bool simd_available(SimdLevel level) {
    return level == SimdLevel::Scalar || cpu_has_avx2();
}

void force_simd_level(SimdLevel level) {
    const KernelTable* t = table_for(level);
    if (!t || (level == SimdLevel::Avx2 && !cpu_has_avx2()))
        throw std::runtime_error("requested SIMD level unavailable");
    dispatch().table = t;
    dispatch().level = level;
}

}  // namespace qpinn
