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
 * The PINN model: a SiLU multilayer perceptron from (x, y, z) to the flow
 * fields, in two variants.
 *
 *  - classical: 3 -> 64 x5 -> 16 -> 4, SiLU between adjacent layers, no
 *    activation after the output layer; outputs are (vx, vy, vz, p).
 *  - hybrid: the same trunk up to the 16-wide layer, whose outputs are
 *    squashed by tanh and scaled by pi into Ry encoding angles for the
 *    quantum layer; a final dense 4 -> 4 head maps the Z expectations to
 *    the fields. The trunk ends at the 16-wide affine output (the encoding
 *    tanh takes the place of the inter-layer activation there).
 *
 * All trainable parameters live in one flat vector (layer weights row-major,
 * then biases, layer by layer; then circuit angles and head for the hybrid)
 * so the optimizers and the tape can address them uniformly.
 */

#pragma once

#include <array>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qpinn/dual.hpp"
#include "qpinn/quantum.hpp"
#include "qpinn/tape.hpp"

namespace qpinn {

enum class Variant { Classical, Hybrid };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct Architecture {
    Variant variant = Variant::Classical;
    std::vector<int> layer_widths;  // affine chain including the input width
    CircuitSpec circuit;            // hybrid only
    int head_in = 0, head_out = 0;  // hybrid only

    static Architecture classical();
    static Architecture hybrid();

    int n_layers() const { return static_cast<int>(layer_widths.size()) - 1; }
    std::size_t layer_param_count(int l) const;
    std::size_t layer_offset(int l) const;
    std::size_t circuit_offset() const;
    std::size_t head_offset() const;
    std::size_t total_params() const;

    bool operator==(const Architecture& other) const;
};

struct ModelParams {
    Architecture arch;
    std::vector<double> flat;

    std::span<const double> layer_weights(int l) const;
    std::span<const double> layer_bias(int l) const;
    std::span<const double> circuit_params() const;
};

/// Deterministic Glorot-uniform initialization (biases zero); hybrid circuit
/// angles start near identity in [-0.1, 0.1].
ModelParams init_params(std::uint64_t seed, Variant variant);

/// Builds a hybrid model whose trunk layers are copied from a trained
/// classical model; the classical 16->4 head is dropped and the circuit
/// angles plus the fresh 4->4 head are drawn from `seed`.
ModelParams hybrid_from_classical(const ModelParams& classical,
                                  std::uint64_t seed);

template <class S>
struct Prediction {
    std::array<S, 3> velocity;
    S pressure;
};

namespace detail {

template <class S>
void affine_apply(std::span<const double> W, std::span<const double> b,
                  std::span<const S> in, std::vector<S>& out) {
    const int m = static_cast<int>(b.size());
    const int k = static_cast<int>(in.size());
    out.clear();
    for (int i = 0; i < m; ++i) {
        S acc = constant_like(in[0], b[i]);
        for (int j = 0; j < k; ++j) acc = acc + in[j] * W[i * k + j];
        out.push_back(acc);
    }
}

template <class S>
std::vector<S> run_chain(const ModelParams& mp, const std::array<S, 3>& point,
                         bool silu_after_last) {
    std::vector<S> cur(point.begin(), point.end());
    std::vector<S> next;
    const int L = mp.arch.n_layers();
    for (int l = 0; l < L; ++l) {
        affine_apply<S>(mp.layer_weights(l), mp.layer_bias(l),
                        std::span<const S>(cur), next);
        cur.swap(next);
        if (l + 1 < L || silu_after_last)
            for (S& v : cur) v = silu(v);
    }
    return cur;
}

}  // namespace detail

/// Trunk features of the hybrid variant (the 16-wide affine output, before
/// the encoding squash).
template <class S>
std::vector<S> forward_trunk(const ModelParams& mp,
                             const std::array<S, 3>& point) {
    if (mp.arch.variant != Variant::Hybrid)
        throw std::invalid_argument("forward_trunk: hybrid variant required");
    if (mp.flat.size() != mp.arch.total_params())
        throw std::invalid_argument("forward_trunk: parameter size mismatch");
    return detail::run_chain<S>(mp, point, /*silu_after_last=*/false);
}

/// Full model evaluation. The scalar type selects the mode: double for
/// plain inference, Dual for spatial derivatives.
template <class S>
Prediction<S> forward_fields(const ModelParams& mp,
                             const std::array<S, 3>& point) {
    if (mp.flat.size() != mp.arch.total_params())
        throw std::invalid_argument("forward_fields: parameter size mismatch");
    std::vector<S> out4;
    if (mp.arch.variant == Variant::Classical) {
        out4 = detail::run_chain<S>(mp, point, /*silu_after_last=*/false);
    } else {
        using std::tanh;
        std::vector<S> feats = detail::run_chain<S>(mp, point, false);
        for (S& f : feats) f = tanh(f) * std::numbers::pi;
        std::vector<S> qp;
        qp.reserve(mp.arch.circuit.param_count());
        const std::span<const double> cp = mp.circuit_params();
        for (double v : cp) qp.push_back(constant_like(feats[0], v));
        std::vector<S> z = run_circuit<S>(mp.arch.circuit,
                                          std::span<const S>(feats),
                                          std::span<const S>(qp));
        const std::size_t ho = mp.arch.head_offset();
        const std::size_t hw = static_cast<std::size_t>(mp.arch.head_in) *
                               mp.arch.head_out;
        detail::affine_apply<S>(
            std::span<const double>(mp.flat).subspan(ho, hw),
            std::span<const double>(mp.flat).subspan(ho + hw, mp.arch.head_out),
            std::span<const S>(z), out4);
    }
    return Prediction<S>{{out4[0], out4[1], out4[2]}, out4[3]};
}

/// Records the model on a parameter tape. Returns the four output handles
/// (vx, vy, vz, p). With spatial=true the inputs are seeded Duals and the
/// derivative payloads propagate; otherwise only value lanes are computed.
std::array<Var, 4> tape_forward(Tape& tape, const ModelParams& mp,
                                const std::array<double, 3>& point,
                                bool spatial);

/// Versioned text container: architecture descriptor then one parameter per
/// line at full precision (17 significant digits round-trips doubles).
void save_checkpoint(const ModelParams& mp, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace qpinn
