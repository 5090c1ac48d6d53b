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

// Scalar reference kernels. These are the ground truth the SIMD variants are
// equivalence-tested against; keep them simple.

#include <cmath>

#include "qpinn/kernels.hpp"

namespace qpinn {
namespace {

void affine_forward_scalar(const double* W, const double* b, const Dual* x,
                           Dual* y, int m, int k, bool spatial) {
    if (spatial) {
        for (int i = 0; i < m; ++i) {
            Dual acc(b[i]);
            const double* w = W + static_cast<std::size_t>(i) * k;
            for (int j = 0; j < k; ++j) {
                for (int l = 0; l < 7; ++l) acc.d[l] += w[j] * x[j].d[l];
            }
            y[i] = acc;
        }
    } else {
        for (int i = 0; i < m; ++i) {
            double acc = b[i];
            const double* w = W + static_cast<std::size_t>(i) * k;
            for (int j = 0; j < k; ++j) acc += w[j] * x[j].d[0];
            y[i] = Dual(acc);
        }
    }
}

void affine_backward_scalar(const double* W, const Dual* x, const Dual* ybar,
                            Dual* xbar, double* Wbar, double* bbar, int m,
                            int k, bool spatial) {
    if (spatial) {
        for (int i = 0; i < m; ++i) {
            const double* w = W + static_cast<std::size_t>(i) * k;
            double* wb = Wbar + static_cast<std::size_t>(i) * k;
            const Dual& yb = ybar[i];
            for (int j = 0; j < k; ++j) {
                double dotv = 0.0;
                for (int l = 0; l < 7; ++l) {
                    xbar[j].d[l] += w[j] * yb.d[l];
                    dotv += yb.d[l] * x[j].d[l];
                }
                wb[j] += dotv;
            }
            bbar[i] += yb.d[0];
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

void silu_forward_scalar(const Dual* x, Dual* y, int n, bool spatial) {
    if (spatial) {
        for (int i = 0; i < n; ++i)
            y[i] = apply_unary(unary_derivs(UnaryOp::Silu, x[i].value()), x[i]);
    } else {
        for (int i = 0; i < n; ++i) y[i] = Dual(silu(x[i].value()));
    }
}

void silu_backward_scalar(const Dual* x, const Dual* ybar, Dual* xbar, int n,
                          bool spatial) {
    for (int i = 0; i < n; ++i) {
        const UnaryDerivs u = unary_derivs(UnaryOp::Silu, x[i].value());
        const Dual& yb = ybar[i];
        if (spatial) {
            double av = yb.d[0] * u.f1;
            for (int c = 0; c < 3; ++c) {
                const double g = x[i].grad(c), h = x[i].hess(c);
                av += yb.grad(c) * u.f2 * g + yb.hess(c) * (u.f3 * g * g + u.f2 * h);
                xbar[i].grad(c) += yb.grad(c) * u.f1 + 2.0 * yb.hess(c) * u.f2 * g;
                xbar[i].hess(c) += yb.hess(c) * u.f1;
            }
            xbar[i].d[0] += av;
        } else {
            xbar[i].d[0] += yb.d[0] * u.f1;
        }
    }
}

double dot_scalar(const double* a, const double* b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, int n) {
    for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal_scalar(double alpha, double* x, int n) {
    for (int i = 0; i < n; ++i) x[i] *= alpha;
}

void adam_update_scalar(double* params, double* m, double* v,
                        const double* grad, int n, double lr, double beta1,
                        double beta2, double eps, double bias1, double bias2) {
    for (int i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
        const double mh = m[i] / bias1;
        const double vh = v[i] / bias2;
        params[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
}

}  // namespace

const KernelTable kScalarKernels = {
    affine_forward_scalar, affine_backward_scalar, silu_forward_scalar,
    silu_backward_scalar,  dot_scalar,             axpy_scalar,
    scal_scalar,           adam_update_scalar,     "scalar",
};

}  // namespace qpinn
