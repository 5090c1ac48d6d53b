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

#include "qpinn/quantum.hpp"

#include <algorithm>

namespace qpinn {
namespace {

struct FlatGate {
    enum Kind { Ry, Cnot } kind;
    int q1 = 0, q2 = 0;
    double angle = 0.0;
    int param_index = -1;  // -1: encoding or fixed gate
};

std::vector<FlatGate> flatten(const CircuitSpec& spec,
                              std::span<const double> features,
                              std::span<const double> params) {
    std::vector<FlatGate> gates;
    for (const CircuitBlock& blk : spec.blocks) {
        for (auto [q, f] : blk.encodings)
            gates.push_back({FlatGate::Ry, q, 0, features[f], -1});
        for (auto [q, p] : blk.rotations)
            gates.push_back({FlatGate::Ry, q, 0, params[p], p});
        for (auto [c, t] : blk.entanglers)
            gates.push_back({FlatGate::Cnot, c, t, 0.0, -1});
    }
    return gates;
}

// Applies dRy/dtheta = 0.5 * [[-sin t/2, -cos t/2], [cos t/2, -sin t/2]].
StateVector apply_dry(const StateVector& state, int qubit, double angle) {
    StateVector out = state;
    const double c = 0.5 * std::cos(angle * 0.5);
    const double s = 0.5 * std::sin(angle * 0.5);
    const std::size_t mask = std::size_t{1} << qubit;
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (i & mask) continue;
        const Complex<double> a = state.amps[i];
        const Complex<double> b = state.amps[i | mask];
        out.amps[i] = Complex<double>{-s * a.re - c * b.re, -s * a.im - c * b.im};
        out.amps[i | mask] = Complex<double>{c * a.re - s * b.re, c * a.im - s * b.im};
    }
    return out;
}

double re_inner(const StateVector& bra, const StateVector& ket) {
    double acc = 0.0;
    for (std::size_t i = 0; i < bra.size(); ++i)
        acc += bra.amps[i].re * ket.amps[i].re + bra.amps[i].im * ket.amps[i].im;
    return acc;
}

void apply_z(StateVector& state, int qubit) {
    const std::size_t mask = std::size_t{1} << qubit;
    for (std::size_t i = 0; i < state.size(); ++i)
        if (i & mask) {
            state.amps[i].re = -state.amps[i].re;
            state.amps[i].im = -state.amps[i].im;
        }
}

void undo_gate(StateVector& state, const FlatGate& g) {
    if (g.kind == FlatGate::Ry)
        apply_ry(state, g.q1, -g.angle);
    else
        apply_cnot(state, g.q1, g.q2);
}

}  // namespace

int CircuitSpec::feature_count() const {
    int n = 0;
    for (const CircuitBlock& b : blocks) n += static_cast<int>(b.encodings.size());
    return n;
}

int CircuitSpec::param_count() const {
    int n = 0;
    for (const CircuitBlock& b : blocks) n += static_cast<int>(b.rotations.size());
    return n;
}

void CircuitSpec::validate() const {
    if (n_qubits < 1 || n_qubits > 24)
        throw std::invalid_argument("CircuitSpec: qubit count out of range");
    const int nf = feature_count();
    const int np = param_count();
    std::vector<int> feat_seen(nf, 0), param_seen(np, 0);
    for (const CircuitBlock& blk : blocks) {
        for (auto [q, f] : blk.encodings) {
            detail::check_qubit(n_qubits, q, "CircuitSpec encoding");
            if (f < 0 || f >= nf)
                throw std::invalid_argument("CircuitSpec: feature index out of range");
            ++feat_seen[f];
        }
        for (auto [q, p] : blk.rotations) {
            detail::check_qubit(n_qubits, q, "CircuitSpec rotation");
            if (p < 0 || p >= np)
                throw std::invalid_argument("CircuitSpec: parameter index out of range");
            ++param_seen[p];
        }
        for (auto [c, t] : blk.entanglers) {
            detail::check_qubit(n_qubits, c, "CircuitSpec entangler");
            detail::check_qubit(n_qubits, t, "CircuitSpec entangler");
            if (c == t)
                throw std::invalid_argument("CircuitSpec: entangler control equals target");
        }
    }
    for (int c : feat_seen)
        if (c != 1)
            throw std::invalid_argument(
                "CircuitSpec: every feature must appear in exactly one encoding slot");
    for (int c : param_seen)
        if (c != 1)
            throw std::invalid_argument(
                "CircuitSpec: parameter indices must be unique and contiguous");
    if (readout.empty())
        throw std::invalid_argument("CircuitSpec: no readout qubits");
    for (int q : readout) detail::check_qubit(n_qubits, q, "CircuitSpec readout");
}

CircuitSpec CircuitSpec::data_reuploading(int n_qubits, int n_blocks) {
    CircuitSpec spec;
    spec.n_qubits = n_qubits;
    for (int b = 0; b < n_blocks; ++b) {
        CircuitBlock blk;
        for (int q = 0; q < n_qubits; ++q)
            blk.encodings.emplace_back(q, b * n_qubits + q);
        for (int q = 0; q < n_qubits; ++q)
            blk.rotations.emplace_back(q, b * n_qubits + q);
        if (n_qubits >= 2)
            for (int q = 0; q < n_qubits; ++q)
                blk.entanglers.emplace_back(q, (q + 1) % n_qubits);
        spec.blocks.push_back(std::move(blk));
    }
    for (int q = 0; q < n_qubits; ++q) spec.readout.push_back(q);
    spec.validate();
    return spec;
}

std::vector<std::vector<double>> adjoint_gradient(const CircuitSpec& spec,
                                                  std::span<const double> features,
                                                  std::span<const double> params) {
    spec.validate();
    if (static_cast<int>(features.size()) != spec.feature_count())
        throw std::invalid_argument("adjoint_gradient: feature count mismatch");
    if (static_cast<int>(params.size()) != spec.param_count())
        throw std::invalid_argument("adjoint_gradient: parameter count mismatch");

    const auto gates = flatten(spec, features, params);
    StateVector psi = make_ground_state(spec.n_qubits);
    for (const FlatGate& g : gates) {
        if (g.kind == FlatGate::Ry)
            apply_ry(psi, g.q1, g.angle);
        else
            apply_cnot(psi, g.q1, g.q2);
    }

    // lambda_k = Z_k |psi>, pulled back through the circuit alongside psi
    std::vector<StateVector> lambdas;
    lambdas.reserve(spec.readout.size());
    for (int q : spec.readout) {
        lambdas.push_back(psi);
        apply_z(lambdas.back(), q);
    }

    std::vector<std::vector<double>> grad(
        spec.readout.size(), std::vector<double>(params.size(), 0.0));
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
        undo_gate(psi, *it);
        if (it->param_index >= 0) {
            const StateVector dpsi = apply_dry(psi, it->q1, it->angle);
            for (std::size_t k = 0; k < lambdas.size(); ++k)
                grad[k][it->param_index] = 2.0 * re_inner(lambdas[k], dpsi);
        }
        for (StateVector& l : lambdas) undo_gate(l, *it);
    }
    return grad;
}

}  // namespace qpinn
