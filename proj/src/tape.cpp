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

#include "qpinn/tape.hpp"

#include <algorithm>
#include <stdexcept>

#include "qpinn/kernels.hpp"

namespace qpinn {
namespace {

// Transposed Jacobian of the dual product c = a*b, contribution through one
// factor: abar += (dc/da)^T cbar evaluated at the co-factor's value.
inline void mul_transpose(const Dual& cbar, const Dual& other, Dual& abar) {
    double av = cbar.d[0] * other.d[0];
    for (int i = 0; i < 3; ++i) {
        av += cbar.grad(i) * other.grad(i) + cbar.hess(i) * other.hess(i);
        abar.grad(i) +=
            cbar.grad(i) * other.d[0] + 2.0 * cbar.hess(i) * other.grad(i);
        abar.hess(i) += cbar.hess(i) * other.d[0];
    }
    abar.d[0] += av;
}

inline void unary_transpose(const UnaryDerivs& u, const Dual& in,
                            const Dual& cbar, Dual& abar) {
    double av = cbar.d[0] * u.f1;
    for (int i = 0; i < 3; ++i) {
        const double g = in.grad(i), h = in.hess(i);
        av += cbar.grad(i) * u.f2 * g + cbar.hess(i) * (u.f3 * g * g + u.f2 * h);
        abar.grad(i) += cbar.grad(i) * u.f1 + 2.0 * cbar.hess(i) * u.f2 * g;
        abar.hess(i) += cbar.hess(i) * u.f1;
    }
    abar.d[0] += av;
}

inline bool payload_zero(const Dual& v) {
    for (int i = 1; i < 7; ++i)
        if (v.d[i] != 0.0) return false;
    return true;
}

}  // namespace

void Tape::bind_params(std::span<const double> params) { params_ = params; }

void Tape::reset() {
    nodes_.clear();
    values_.clear();
    is_const_.clear();
    pack_srcs_.clear();
    affine_recs_.clear();
}

std::int32_t Tape::push_values(int n) {
    const std::int32_t base = static_cast<std::int32_t>(values_.size());
    values_.resize(values_.size() + n);
    is_const_.resize(values_.size(), 0);
    return base;
}

Var Tape::push_node(OpKind kind, std::uint8_t aux, std::int32_t a,
                    std::int32_t b, int n, double imm) {
    const std::int32_t out = push_values(n);
    nodes_.push_back(Node{kind, aux, a, b, out, n, imm});
    return Var{this, out};
}

void Tape::check(Var v) const {
    if (v.tape != this || v.id < 0 ||
        v.id >= static_cast<std::int32_t>(values_.size()))
        throw std::invalid_argument("Var does not belong to this tape");
}

bool Tape::is_const_value(Var v, double want) const {
    return is_const_[v.id] && values_[v.id].d[0] == want &&
           payload_zero(values_[v.id]);
}

bool Tape::is_const_zero(Var v) const { return is_const_value(v, 0.0); }

Var Tape::constant(double v) { return constant(Dual(v)); }

Var Tape::constant(const Dual& v) {
    Var out = push_node(OpKind::Const, 0, -1, -1, 1, 0.0);
    values_[out.id] = v;
    is_const_[out.id] = 1;
    return out;
}

Var Tape::param(int index) {
    if (index < 0 || static_cast<std::size_t>(index) >= params_.size())
        throw std::out_of_range("parameter index outside bound vector");
    Var out = push_node(OpKind::Param, 0, index, -1, 1, 0.0);
    values_[out.id] = Dual(params_[index]);
    return out;
}

Var Tape::add(Var a, Var b) {
    check(a);
    check(b);
    if (is_const_zero(a)) return b;
    if (is_const_zero(b)) return a;
    Var out = push_node(OpKind::Add, 0, a.id, b.id, 1, 0.0);
    values_[out.id] = values_[a.id] + values_[b.id];
    return out;
}

Var Tape::sub(Var a, Var b) {
    check(a);
    check(b);
    if (is_const_zero(b)) return a;
    if (is_const_zero(a)) return unary(UnaryOp::Neg, b);
    Var out = push_node(OpKind::Sub, 0, a.id, b.id, 1, 0.0);
    values_[out.id] = values_[a.id] - values_[b.id];
    return out;
}

Var Tape::mul(Var a, Var b) {
    check(a);
    check(b);
    if (is_const_zero(a)) return a;
    if (is_const_zero(b)) return b;
    if (is_const_value(a, 1.0)) return b;
    if (is_const_value(b, 1.0)) return a;
    Var out = push_node(OpKind::Mul, 0, a.id, b.id, 1, 0.0);
    values_[out.id] = values_[a.id] * values_[b.id];
    return out;
}

Var Tape::add_const(Var a, double k) {
    check(a);
    if (k == 0.0) return a;
    Var out = push_node(OpKind::AddK, 0, a.id, -1, 1, k);
    values_[out.id] = values_[a.id] + k;
    return out;
}

Var Tape::mul_const(Var a, double k) {
    check(a);
    if (k == 1.0) return a;
    if (is_const_zero(a)) return a;
    Var out = push_node(OpKind::MulK, 0, a.id, -1, 1, k);
    values_[out.id] = values_[a.id] * k;
    return out;
}

Var Tape::unary(UnaryOp op, Var a) {
    check(a);
    Var out =
        push_node(OpKind::Unary, static_cast<std::uint8_t>(op), a.id, -1, 1, 0.0);
    values_[out.id] =
        apply_unary(unary_derivs(op, values_[a.id].value()), values_[a.id]);
    return out;
}

Var Tape::value_only(Var a) {
    check(a);
    Var out = push_node(OpKind::ValueOnly, 0, a.id, -1, 1, 0.0);
    values_[out.id] = Dual(values_[a.id].value());
    return out;
}

Var Tape::extract_grad(Var a, int axis) {
    check(a);
    Var out = push_node(OpKind::ExtractGrad, static_cast<std::uint8_t>(axis),
                        a.id, -1, 1, 0.0);
    values_[out.id] = Dual(values_[a.id].grad(axis));
    return out;
}

Var Tape::extract_hess(Var a, int axis) {
    check(a);
    Var out = push_node(OpKind::ExtractHess, static_cast<std::uint8_t>(axis),
                        a.id, -1, 1, 0.0);
    values_[out.id] = Dual(values_[a.id].hess(axis));
    return out;
}

Var Tape::affine(Var in, int k, int param_offset, int m, bool spatial) {
    check(in);
    if (in.id + k > static_cast<std::int32_t>(values_.size()))
        throw std::invalid_argument("affine: input range not on tape");
    if (param_offset < 0 ||
        static_cast<std::size_t>(param_offset) + static_cast<std::size_t>(m) * k + m >
            params_.size())
        throw std::invalid_argument("affine: parameter block out of range");
    const std::int32_t rec = static_cast<std::int32_t>(affine_recs_.size());
    affine_recs_.push_back({param_offset, m, k});
    Var out = push_node(OpKind::Affine, spatial ? 1 : 0, in.id, rec, m, 0.0);
    active_kernels().affine_forward(
        params_.data() + param_offset, params_.data() + param_offset +
            static_cast<std::size_t>(m) * k,
        &values_[in.id], &values_[out.id], m, k, spatial);
    return out;
}

Var Tape::silu_vec(Var in, int n, bool spatial) {
    check(in);
    if (in.id + n > static_cast<std::int32_t>(values_.size()))
        throw std::invalid_argument("silu_vec: input range not on tape");
    Var out = push_node(OpKind::SiluVec, spatial ? 1 : 0, in.id, -1, n, 0.0);
    active_kernels().silu_forward(&values_[in.id], &values_[out.id], n, spatial);
    return out;
}

Var Tape::pack(std::span<const Var> vars) {
    for (Var v : vars) check(v);
    const std::int32_t off = static_cast<std::int32_t>(pack_srcs_.size());
    for (Var v : vars) pack_srcs_.push_back(v.id);
    Var out = push_node(OpKind::Pack, 0, -1, off,
                        static_cast<int>(vars.size()), 0.0);
    for (std::size_t i = 0; i < vars.size(); ++i)
        values_[out.id + i] = values_[vars[i].id];
    return out;
}

Var Tape::at(Var base, int offset) const {
    Var v{base.tape, base.id + offset};
    check(v);
    return v;
}

const Dual& Tape::value(Var v) const {
    check(v);
    return values_[v.id];
}

void Tape::backward(Var loss, std::span<double> grad, double seed) {
    check(loss);
    if (grad.size() != params_.size())
        throw std::invalid_argument("gradient buffer size != parameter count");
    adjoints_.assign(values_.size(), Dual());
    adjoints_[loss.id].d[0] = seed;

    const KernelTable& kt = active_kernels();
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        const Node& nd = *it;
        switch (nd.kind) {
            case OpKind::Const:
                break;
            case OpKind::Param:
                grad[nd.a] += adjoints_[nd.out].d[0];
                break;
            case OpKind::Add:
                adjoints_[nd.a] += adjoints_[nd.out];
                adjoints_[nd.b] += adjoints_[nd.out];
                break;
            case OpKind::Sub:
                adjoints_[nd.a] += adjoints_[nd.out];
                adjoints_[nd.b] -= adjoints_[nd.out];
                break;
            case OpKind::Mul:
                mul_transpose(adjoints_[nd.out], values_[nd.b], adjoints_[nd.a]);
                mul_transpose(adjoints_[nd.out], values_[nd.a], adjoints_[nd.b]);
                break;
            case OpKind::AddK:
                adjoints_[nd.a] += adjoints_[nd.out];
                break;
            case OpKind::MulK: {
                const Dual& c = adjoints_[nd.out];
                for (int i = 0; i < 7; ++i) adjoints_[nd.a].d[i] += nd.imm * c.d[i];
                break;
            }
            case OpKind::Unary:
                unary_transpose(unary_derivs(static_cast<UnaryOp>(nd.aux),
                                             values_[nd.a].value()),
                                values_[nd.a], adjoints_[nd.out],
                                adjoints_[nd.a]);
                break;
            case OpKind::ValueOnly:
                adjoints_[nd.a].d[0] += adjoints_[nd.out].d[0];
                break;
            case OpKind::ExtractGrad:
                adjoints_[nd.a].grad(nd.aux) += adjoints_[nd.out].d[0];
                break;
            case OpKind::ExtractHess:
                adjoints_[nd.a].hess(nd.aux) += adjoints_[nd.out].d[0];
                break;
            case OpKind::Affine: {
                const AffineRec& r = affine_recs_[nd.b];
                kt.affine_backward(
                    params_.data() + r.param_offset, &values_[nd.a],
                    &adjoints_[nd.out], &adjoints_[nd.a],
                    grad.data() + r.param_offset,
                    grad.data() + r.param_offset +
                        static_cast<std::size_t>(r.m) * r.k,
                    r.m, r.k, nd.aux != 0);
                break;
            }
            case OpKind::SiluVec:
                kt.silu_backward(&values_[nd.a], &adjoints_[nd.out],
                                 &adjoints_[nd.a], nd.n, nd.aux != 0);
                break;
            case OpKind::Pack:
                for (int i = 0; i < nd.n; ++i)
                    adjoints_[pack_srcs_[nd.b + i]] += adjoints_[nd.out + i];
                break;
        }
    }
}

}  // namespace qpinn
