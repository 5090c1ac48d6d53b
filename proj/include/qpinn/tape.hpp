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
 * Reverse-mode tape over forward-mode values.
 *
 * Every recorded value is a Dual: spatial first/second derivatives ride
 * through the forward pass as payload, while the tape records the operation
 * graph needed to differentiate a scalar loss with respect to the trainable
 * parameters. Adjoints are Dual-shaped (one slot per payload lane) because
 * the loss reads derivative lanes of network outputs through the extract_*
 * operations; at a parameter leaf only the value-lane adjoint survives,
 * which is exactly dLoss/dtheta.
 *
 * Tapes are single-owner objects: one tape per evaluation thread, reset and
 * refilled per point. Gradients accumulate into a caller-provided buffer so
 * per-thread results can be summed in a fixed order.
 */

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qpinn/dual.hpp"

namespace qpinn {

class Tape;

/// Handle to a scalar recorded on a Tape. Copyable, trivially small;
/// operator overloads record new nodes on the owning tape.
struct Var {
    Tape* tape = nullptr;
    std::int32_t id = -1;
};

class Tape {
  public:
    Tape() = default;

    /// Binds the flat trainable-parameter vector. Affine nodes and parameter
    /// leaves read values from it; backward() accumulates at matching
    /// offsets. The span must stay valid while the tape is in use.
    void bind_params(std::span<const double> params);

    /// Drops all recorded nodes but keeps capacity and the parameter
    /// binding; the tape is immediately reusable.
    void reset();

    Var constant(double v);
    Var constant(const Dual& v);

    /// Parameter leaf: value params[index], zero spatial payload.
    Var param(int index);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var add_const(Var a, double k);
    Var mul_const(Var a, double k);
    Var unary(UnaryOp op, Var a);

    /// Keeps the value lane, zeroes the payload.
    Var value_only(Var a);
    /// Lifts the first/second spatial derivative of `a` into a value.
    Var extract_grad(Var a, int axis);
    Var extract_hess(Var a, int axis);

    /// Dense layer over the k values starting at `in`: m outputs, weights
    /// row-major at param_offset, biases at param_offset + m*k. Outputs are
    /// contiguous starting at the returned id. With spatial=false only value
    /// lanes are computed (boundary points need no derivatives).
    Var affine(Var in, int k, int param_offset, int m, bool spatial);

    /// Elementwise SiLU over n contiguous values.
    Var silu_vec(Var in, int n, bool spatial);

    /// Copies arbitrary values into a fresh contiguous range.
    Var pack(std::span<const Var> vars);

    Var at(Var base, int offset) const;  // base.id + offset, bounds-checked

    const Dual& value(Var v) const;
    double scalar_value(Var v) const { return value(v).value(); }

    /// Reverse sweep from `loss` (seed lands on its value lane). Gradients
    /// accumulate (+=) into `grad`, which must cover the bound parameter
    /// vector. Rejects handles that are not live nodes of this tape.
    void backward(Var loss, std::span<double> grad, double seed = 1.0);

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t value_count() const { return values_.size(); }
    std::span<const double> params() const { return params_; }

  private:
    enum class OpKind : std::uint8_t {
        Const,
        Param,
        Add,
        Sub,
        Mul,
        AddK,
        MulK,
        Unary,
        ValueOnly,
        ExtractGrad,
        ExtractHess,
        Affine,
        SiluVec,
        Pack,
    };

    struct Node {
        OpKind kind;
        std::uint8_t aux;  // UnaryOp / axis / spatial flag
        std::int32_t a;    // input id, or param index for Param
        std::int32_t b;    // second input id / side-table index
        std::int32_t out;  // first output value id
        std::int32_t n;    // output count
        double imm;        // AddK / MulK constant
    };

    struct AffineRec {
        std::int32_t param_offset, m, k;
    };

    std::int32_t push_values(int n);
    Var push_node(OpKind kind, std::uint8_t aux, std::int32_t a,
                  std::int32_t b, int n, double imm);
    void check(Var v) const;
    bool is_const_value(Var v, double want) const;
    bool is_const_zero(Var v) const;

    std::vector<Node> nodes_;
    std::vector<Dual> values_;
    std::vector<Dual> adjoints_;
    std::vector<std::uint8_t> is_const_;
    std::vector<std::int32_t> pack_srcs_;
    std::vector<AffineRec> affine_recs_;
    std::span<const double> params_;
};

// Operator sugar so scalar-generic code (the quantum circuit in particular)
// can run with Var as its scalar type.
inline Var operator+(Var a, Var b) { return a.tape->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape->mul(a, b); }
inline Var operator+(Var a, double k) { return a.tape->add_const(a, k); }
inline Var operator+(double k, Var a) { return a.tape->add_const(a, k); }
inline Var operator-(Var a, double k) { return a.tape->add_const(a, -k); }
inline Var operator*(Var a, double k) { return a.tape->mul_const(a, k); }
inline Var operator*(double k, Var a) { return a.tape->mul_const(a, k); }
inline Var operator/(Var a, double k) { return a.tape->mul_const(a, 1.0 / k); }
inline Var operator-(Var a) { return a.tape->unary(UnaryOp::Neg, a); }
inline Var operator-(double k, Var a) { return a.tape->add_const(-a, k); }
inline Var operator/(Var a, Var b) {
    return a.tape->mul(a, a.tape->unary(UnaryOp::Recip, b));
}
inline Var exp(Var a) { return a.tape->unary(UnaryOp::Exp, a); }
inline Var sin(Var a) { return a.tape->unary(UnaryOp::Sin, a); }
inline Var cos(Var a) { return a.tape->unary(UnaryOp::Cos, a); }
inline Var tanh(Var a) { return a.tape->unary(UnaryOp::Tanh, a); }
inline Var logistic(Var a) { return a.tape->unary(UnaryOp::Logistic, a); }
inline Var silu(Var a) { return a.tape->unary(UnaryOp::Silu, a); }
inline Var recip(Var a) { return a.tape->unary(UnaryOp::Recip, a); }
inline Var square(Var a) { return a.tape->unary(UnaryOp::Square, a); }

/// constant_like: builds a literal constant in whatever scalar type generic
/// code is instantiated with.
inline double constant_like(double, double v) { return v; }
inline Dual constant_like(const Dual&, double v) { return Dual(v); }
inline Var constant_like(const Var& like, double v) {
    return like.tape->constant(v);
}

}  // namespace qpinn
