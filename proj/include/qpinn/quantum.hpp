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
 * Statevector simulation of the variational quantum circuit layer.
 *
 * The simulator is generic over the amplitude scalar: `double` for plain
 * evaluation and adjoint differentiation, `Dual` to propagate spatial
 * derivatives through the gates, and `Var` to record the circuit on the
 * parameter tape during training. Qubit 0 is the least significant bit of
 * the basis index.
 *
 * The circuit family is data re-uploading: each block encodes a slice of
 * the input features as Ry angles, applies trainable Ry rotations, then a
 * CNOT ring; readout is the Pauli-Z expectation of each measured qubit.
 */

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpinn/dual.hpp"
#include "qpinn/tape.hpp"

namespace qpinn {

/// Minimal complex template; std::complex is only specified for the builtin
/// floating types, and the amplitudes here also carry Dual/Var scalars.
template <class S>
struct Complex {
    S re, im;
};

template <class S>
inline Complex<S> operator+(const Complex<S>& a, const Complex<S>& b) {
    return {a.re + b.re, a.im + b.im};
}
template <class S>
inline Complex<S> operator-(const Complex<S>& a, const Complex<S>& b) {
    return {a.re - b.re, a.im - b.im};
}
template <class S>
inline Complex<S> operator*(const Complex<S>& a, const Complex<S>& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class S>
inline Complex<S> operator*(const S& k, const Complex<S>& a) {
    return {k * a.re, k * a.im};
}
template <class S>
inline S norm_sq(const Complex<S>& a) {
    return a.re * a.re + a.im * a.im;
}

/// 2^n complex amplitudes; unit norm is preserved by every gate.
template <class S>
struct BasicStateVector {
    int n_qubits = 0;
    std::vector<Complex<S>> amps;

    std::size_t size() const { return amps.size(); }
};

using StateVector = BasicStateVector<double>;

template <class S>
BasicStateVector<S> make_ground_state(int n_qubits, const S& like) {
    if (n_qubits < 1 || n_qubits > 24)
        throw std::invalid_argument("qubit count out of supported range");
    BasicStateVector<S> st;
    st.n_qubits = n_qubits;
    const std::size_t dim = std::size_t{1} << n_qubits;
    const S zero = constant_like(like, 0.0);
    st.amps.reserve(dim);
    st.amps.push_back(Complex<S>{constant_like(like, 1.0), zero});
    for (std::size_t i = 1; i < dim; ++i) st.amps.push_back(Complex<S>{zero, zero});
    return st;
}

inline StateVector make_ground_state(int n_qubits) {
    return make_ground_state(n_qubits, 0.0);
}

namespace detail {
inline void check_qubit(int n_qubits, int q, const char* what) {
    if (q < 0 || q >= n_qubits)
        throw std::invalid_argument(std::string(what) + ": qubit out of range");
}
}  // namespace detail

/// Ry(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]] on `qubit`.
template <class S>
void apply_ry(BasicStateVector<S>& state, int qubit, const S& angle) {
    detail::check_qubit(state.n_qubits, qubit, "apply_ry");
    using std::cos;
    using std::sin;
    const S half = angle * 0.5;
    const S c = cos(half), s = sin(half);
    const std::size_t mask = std::size_t{1} << qubit;
    const std::size_t dim = state.size();
    for (std::size_t i = 0; i < dim; ++i) {
        if (i & mask) continue;
        Complex<S>& a = state.amps[i];
        Complex<S>& b = state.amps[i | mask];
        const Complex<S> a0 = a, b0 = b;
        a = (c * a0) - (s * b0);
        b = (s * a0) + (c * b0);
    }
}

/// Basis-state permutation, so the amplitudes move bitwise exactly.
template <class S>
void apply_cnot(BasicStateVector<S>& state, int control, int target) {
    detail::check_qubit(state.n_qubits, control, "apply_cnot");
    detail::check_qubit(state.n_qubits, target, "apply_cnot");
    if (control == target)
        throw std::invalid_argument("apply_cnot: control equals target");
    const std::size_t cmask = std::size_t{1} << control;
    const std::size_t tmask = std::size_t{1} << target;
    const std::size_t dim = state.size();
    for (std::size_t i = 0; i < dim; ++i)
        if ((i & cmask) && !(i & tmask))
            std::swap(state.amps[i], state.amps[i | tmask]);
}

/// <psi| Z_qubit |psi> = sum over basis states of (+-1)|amp|^2.
template <class S>
S expectation_z(const BasicStateVector<S>& state, int qubit) {
    detail::check_qubit(state.n_qubits, qubit, "expectation_z");
    const std::size_t mask = std::size_t{1} << qubit;
    S acc = constant_like(state.amps[0].re, 0.0);
    for (std::size_t i = 0; i < state.size(); ++i) {
        const S p = norm_sq(state.amps[i]);
        acc = (i & mask) ? acc - p : acc + p;
    }
    return acc;
}

/// One data re-uploading block: feature encodings, trainable rotations,
/// entangling CNOTs, applied in that order.
struct CircuitBlock {
    std::vector<std::pair<int, int>> encodings;   // (qubit, feature index)
    std::vector<std::pair<int, int>> rotations;   // (qubit, parameter index)
    std::vector<std::pair<int, int>> entanglers;  // (control, target)
};

struct CircuitSpec {
    int n_qubits = 0;
    std::vector<CircuitBlock> blocks;
    std::vector<int> readout;

    int feature_count() const;
    int param_count() const;

    /// Structural checks: indices in range, every feature consumed exactly
    /// once, parameter indices unique and contiguous from zero. Throws.
    void validate() const;

    /// n_blocks blocks of one encoding + one trainable Ry per qubit and a
    /// CNOT ring; features are consumed in order across blocks; all qubits
    /// are read out in Z.
    static CircuitSpec data_reuploading(int n_qubits, int n_blocks);
};

/// Runs the circuit from |0...0> and returns the Z expectations of the
/// readout qubits. Works for any supported scalar; with Dual features the
/// spatial payloads propagate exactly through the trigonometric entries.
template <class S>
std::vector<S> run_circuit(const CircuitSpec& spec, std::span<const S> features,
                           std::span<const S> params) {
    spec.validate();
    if (static_cast<int>(features.size()) != spec.feature_count())
        throw std::invalid_argument("run_circuit: feature count mismatch");
    if (static_cast<int>(params.size()) != spec.param_count())
        throw std::invalid_argument("run_circuit: parameter count mismatch");
    if (features.empty() && params.empty())
        throw std::invalid_argument("run_circuit: circuit has no angles");
    const S& like = features.empty() ? params[0] : features[0];
    auto state = make_ground_state<S>(spec.n_qubits, like);
    for (const CircuitBlock& blk : spec.blocks) {
        for (auto [q, f] : blk.encodings) apply_ry(state, q, features[f]);
        for (auto [q, p] : blk.rotations) apply_ry(state, q, params[p]);
        for (auto [c, t] : blk.entanglers) apply_cnot(state, c, t);
    }
    std::vector<S> out;
    out.reserve(spec.readout.size());
    for (int q : spec.readout) out.push_back(expectation_z(state, q));
    return out;
}

/// d<Z_k>/dtheta_j for every readout qubit k and trainable parameter j,
/// computed with one forward pass and one gate-undoing backward sweep.
/// Matches the parameter-shift rule to near machine precision.
std::vector<std::vector<double>> adjoint_gradient(const CircuitSpec& spec,
                                                  std::span<const double> features,
                                                  std::span<const double> params);

}  // namespace qpinn
