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
 * Forward-mode scalar carrying the value, the spatial gradient (d/dx, d/dy,
 * d/dz) and the diagonal of the spatial Hessian (d2/dx2, d2/dy2, d2/dz2).
 *
 * Only the pure second derivatives are tracked: the momentum equation needs
 * the Laplacian, which is the trace of the Hessian, and the diagonal is
 * closed under every supported primitive (no mixed partials leak into it).
 * All arithmetic is double precision; second derivatives amplify rounding
 * and single precision does not survive the finite-difference checks.
 */

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace qpinn {

inline constexpr int kSpatialDims = 3;

/// Value plus first/second directional derivative payload w.r.t. (x, y, z).
/// Memory layout is [v, g0, g1, g2, h0, h1, h2, pad]; the trailing pad keeps
/// the struct at two 32-byte lanes so the SIMD kernels can load it whole.
struct alignas(32) Dual {
    double d[8];

    Dual() : d{0, 0, 0, 0, 0, 0, 0, 0} {}
    explicit Dual(double value) : d{value, 0, 0, 0, 0, 0, 0, 0} {}
    Dual(double value, const std::array<double, 3>& grad,
         const std::array<double, 3>& hess)
        : d{value, grad[0], grad[1], grad[2], hess[0], hess[1], hess[2], 0} {}

    double value() const { return d[0]; }
    double& value() { return d[0]; }
    double grad(int i) const { return d[1 + i]; }
    double& grad(int i) { return d[1 + i]; }
    double hess(int i) const { return d[4 + i]; }
    double& hess(int i) { return d[4 + i]; }

    /// Trace of the spatial Hessian.
    double laplacian() const { return d[4] + d[5] + d[6]; }

    bool finite() const {
        for (int i = 0; i < 7; ++i)
            if (!std::isfinite(d[i])) return false;
        return true;
    }
};

/// Seeds the three spatial inputs: component i has value point[i], gradient
/// e_i and zero second derivatives. Rejects non-finite coordinates.
inline std::array<Dual, 3> seed_spatial(const std::array<double, 3>& point) {
    for (double c : point)
        if (!std::isfinite(c))
            throw std::invalid_argument("seed_spatial: non-finite coordinate");
    std::array<Dual, 3> out;
    for (int i = 0; i < 3; ++i) {
        out[i] = Dual(point[i]);
        out[i].grad(i) = 1.0;
    }
    return out;
}

// ---- arithmetic -----------------------------------------------------------

inline Dual operator+(const Dual& a, const Dual& b) {
    Dual c;
    for (int i = 0; i < 7; ++i) c.d[i] = a.d[i] + b.d[i];
    return c;
}

inline Dual operator-(const Dual& a, const Dual& b) {
    Dual c;
    for (int i = 0; i < 7; ++i) c.d[i] = a.d[i] - b.d[i];
    return c;
}

inline Dual operator-(const Dual& a) {
    Dual c;
    for (int i = 0; i < 7; ++i) c.d[i] = -a.d[i];
    return c;
}

inline Dual operator*(const Dual& a, const Dual& b) {
    Dual c;
    c.d[0] = a.d[0] * b.d[0];
    for (int i = 0; i < 3; ++i) {
        c.grad(i) = a.value() * b.grad(i) + a.grad(i) * b.value();
        c.hess(i) = a.value() * b.hess(i) + 2.0 * a.grad(i) * b.grad(i) +
                    a.hess(i) * b.value();
    }
    return c;
}

inline Dual operator/(const Dual& a, const Dual& b) {
    Dual c;
    const double inv = 1.0 / b.value();
    c.value() = a.value() * inv;
    for (int i = 0; i < 3; ++i)
        c.grad(i) = (a.grad(i) - c.value() * b.grad(i)) * inv;
    for (int i = 0; i < 3; ++i)
        c.hess(i) = (a.hess(i) - c.value() * b.hess(i) -
                     2.0 * c.grad(i) * b.grad(i)) * inv;
    return c;
}

inline Dual operator+(const Dual& a, double k) {
    Dual c = a;
    c.value() += k;
    return c;
}
inline Dual operator+(double k, const Dual& a) { return a + k; }
inline Dual operator-(const Dual& a, double k) { return a + (-k); }
inline Dual operator-(double k, const Dual& a) { return (-a) + k; }

inline Dual operator*(const Dual& a, double k) {
    Dual c;
    for (int i = 0; i < 7; ++i) c.d[i] = a.d[i] * k;
    return c;
}
inline Dual operator*(double k, const Dual& a) { return a * k; }
inline Dual operator/(const Dual& a, double k) { return a * (1.0 / k); }
inline Dual operator/(double k, const Dual& a) { return Dual(k) / a; }

inline Dual& operator+=(Dual& a, const Dual& b) { a = a + b; return a; }
inline Dual& operator-=(Dual& a, const Dual& b) { a = a - b; return a; }
inline Dual& operator*=(Dual& a, const Dual& b) { a = a * b; return a; }

// ---- unary primitives -----------------------------------------------------

enum class UnaryOp : std::uint8_t {
    Neg,
    Recip,
    Exp,
    Sin,
    Cos,
    Tanh,
    Logistic,
    Silu,
    Square,
};

/// Value and first three derivatives of a unary primitive at x. The third
/// derivative feeds the reverse sweep over second-order payloads.
struct UnaryDerivs {
    double f0, f1, f2, f3;
};

inline double logistic_value(double x) {
    // Split by sign so the exp never overflows.
    if (x >= 0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline UnaryDerivs unary_derivs(UnaryOp op, double x) {
    switch (op) {
        case UnaryOp::Neg:
            return {-x, -1.0, 0.0, 0.0};
        case UnaryOp::Recip: {
            const double i = 1.0 / x;
            const double i2 = i * i;
            return {i, -i2, 2.0 * i2 * i, -6.0 * i2 * i2};
        }
        case UnaryOp::Exp: {
            const double e = std::exp(x);
            return {e, e, e, e};
        }
        case UnaryOp::Sin: {
            const double s = std::sin(x), c = std::cos(x);
            return {s, c, -s, -c};
        }
        case UnaryOp::Cos: {
            const double s = std::sin(x), c = std::cos(x);
            return {c, -s, -c, s};
        }
        case UnaryOp::Tanh: {
            const double t = std::tanh(x);
            const double f1 = 1.0 - t * t;
            return {t, f1, -2.0 * t * f1, -2.0 * f1 * (1.0 - 3.0 * t * t)};
        }
        case UnaryOp::Logistic: {
            const double s = logistic_value(x);
            const double d1 = s * (1.0 - s);
            const double d2 = d1 * (1.0 - 2.0 * s);
            const double d3 = d2 * (1.0 - 2.0 * s) - 2.0 * d1 * d1;
            return {s, d1, d2, d3};
        }
        case UnaryOp::Silu: {
            const double s = logistic_value(x);
            const double d1 = s * (1.0 - s);
            const double d2 = d1 * (1.0 - 2.0 * s);
            const double d3 = d2 * (1.0 - 2.0 * s) - 2.0 * d1 * d1;
            return {x * s, s + x * d1, 2.0 * d1 + x * d2, 3.0 * d2 + x * d3};
        }
        case UnaryOp::Square:
            return {x * x, 2.0 * x, 2.0, 0.0};
    }
    return {0, 0, 0, 0};  // unreachable
}

/// Chain rule for a unary primitive: g_i -> f1*g_i, h_i -> f2*g_i^2 + f1*h_i.
inline Dual apply_unary(const UnaryDerivs& u, const Dual& a) {
    Dual c;
    c.value() = u.f0;
    for (int i = 0; i < 3; ++i) {
        c.grad(i) = u.f1 * a.grad(i);
        c.hess(i) = u.f2 * a.grad(i) * a.grad(i) + u.f1 * a.hess(i);
    }
    return c;
}

inline Dual exp(const Dual& a) { return apply_unary(unary_derivs(UnaryOp::Exp, a.value()), a); }
inline Dual sin(const Dual& a) { return apply_unary(unary_derivs(UnaryOp::Sin, a.value()), a); }
inline Dual cos(const Dual& a) { return apply_unary(unary_derivs(UnaryOp::Cos, a.value()), a); }
inline Dual tanh(const Dual& a) { return apply_unary(unary_derivs(UnaryOp::Tanh, a.value()), a); }
inline Dual logistic(const Dual& a) { return apply_unary(unary_derivs(UnaryOp::Logistic, a.value()), a); }
inline Dual silu(const Dual& a) { return apply_unary(unary_derivs(UnaryOp::Silu, a.value()), a); }
inline Dual recip(const Dual& a) { return apply_unary(unary_derivs(UnaryOp::Recip, a.value()), a); }
inline Dual square(const Dual& a) { return apply_unary(unary_derivs(UnaryOp::Square, a.value()), a); }

// double overloads so scalar-generic code compiles for plain doubles
inline double logistic(double x) { return logistic_value(x); }
inline double silu(double x) { return x * logistic_value(x); }
inline double recip(double x) { return 1.0 / x; }
inline double square(double x) { return x * x; }

}  // namespace qpinn
