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

#include "qpinn/network.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace qpinn {
namespace {

constexpr int kTrunkHidden = 64;
constexpr int kTrunkFeatures = 16;
constexpr int kOutputs = 4;

// mt19937_64 draw mapped to [0, 1) explicitly; the distribution classes are
// implementation-defined and would break cross-platform determinism.
double next_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double glorot_limit(int fan_in, int fan_out) {
    return std::sqrt(6.0 / (fan_in + fan_out));
}

void fill_affine(std::mt19937_64& rng, std::span<double> block, int out,
                 int in) {
    const double lim = glorot_limit(in, out);
    const std::size_t nw = static_cast<std::size_t>(out) * in;
    for (std::size_t i = 0; i < nw; ++i)
        block[i] = (2.0 * next_uniform(rng) - 1.0) * lim;
    for (int i = 0; i < out; ++i) block[nw + i] = 0.0;
}

}  // namespace

const char* to_string(Variant v) {
    return v == Variant::Classical ? "classical" : "hybrid";
}

Variant variant_from_string(const std::string& s) {
    if (s == "classical") return Variant::Classical;
    if (s == "hybrid") return Variant::Hybrid;
    throw std::invalid_argument("unknown variant: " + s);
}

Architecture Architecture::classical() {
    Architecture a;
    a.variant = Variant::Classical;
    a.layer_widths = {3, kTrunkHidden, kTrunkHidden, kTrunkHidden, kTrunkHidden,
                      kTrunkHidden, kTrunkFeatures, kOutputs};
    return a;
}

Architecture Architecture::hybrid() {
    Architecture a;
    a.variant = Variant::Hybrid;
    a.layer_widths = {3, kTrunkHidden, kTrunkHidden, kTrunkHidden, kTrunkHidden,
                      kTrunkHidden, kTrunkFeatures};
    a.circuit = CircuitSpec::data_reuploading(4, 4);
    a.head_in = kOutputs;
    a.head_out = kOutputs;
    return a;
}

std::size_t Architecture::layer_param_count(int l) const {
    return static_cast<std::size_t>(layer_widths[l + 1]) * layer_widths[l] +
           layer_widths[l + 1];
}

std::size_t Architecture::layer_offset(int l) const {
    std::size_t off = 0;
    for (int i = 0; i < l; ++i) off += layer_param_count(i);
    return off;
}

std::size_t Architecture::circuit_offset() const {
    return layer_offset(n_layers());
}

std::size_t Architecture::head_offset() const {
    return circuit_offset() + circuit.param_count();
}

std::size_t Architecture::total_params() const {
    std::size_t n = layer_offset(n_layers());
    if (variant == Variant::Hybrid)
        n += circuit.param_count() +
             static_cast<std::size_t>(head_in) * head_out + head_out;
    return n;
}

bool Architecture::operator==(const Architecture& other) const {
    if (variant != other.variant || layer_widths != other.layer_widths ||
        head_in != other.head_in || head_out != other.head_out)
        return false;
    if (variant == Variant::Classical) return true;
    if (circuit.n_qubits != other.circuit.n_qubits ||
        circuit.readout != other.circuit.readout ||
        circuit.blocks.size() != other.circuit.blocks.size())
        return false;
    for (std::size_t b = 0; b < circuit.blocks.size(); ++b) {
        const CircuitBlock& x = circuit.blocks[b];
        const CircuitBlock& y = other.circuit.blocks[b];
        if (x.encodings != y.encodings || x.rotations != y.rotations ||
            x.entanglers != y.entanglers)
            return false;
    }
    return true;
}

std::span<const double> ModelParams::layer_weights(int l) const {
    return std::span<const double>(flat).subspan(
        arch.layer_offset(l),
        static_cast<std::size_t>(arch.layer_widths[l + 1]) *
            arch.layer_widths[l]);
}

std::span<const double> ModelParams::layer_bias(int l) const {
    return std::span<const double>(flat).subspan(
        arch.layer_offset(l) +
            static_cast<std::size_t>(arch.layer_widths[l + 1]) *
                arch.layer_widths[l],
        arch.layer_widths[l + 1]);
}

std::span<const double> ModelParams::circuit_params() const {
    return std::span<const double>(flat).subspan(arch.circuit_offset(),
                                                 arch.circuit.param_count());
}

ModelParams init_params(std::uint64_t seed, Variant variant) {
    ModelParams mp;
    mp.arch = variant == Variant::Classical ? Architecture::classical()
                                            : Architecture::hybrid();
    mp.flat.assign(mp.arch.total_params(), 0.0);
    std::mt19937_64 rng(seed);
    for (int l = 0; l < mp.arch.n_layers(); ++l)
        fill_affine(rng,
                    std::span<double>(mp.flat).subspan(
                        mp.arch.layer_offset(l), mp.arch.layer_param_count(l)),
                    mp.arch.layer_widths[l + 1], mp.arch.layer_widths[l]);
    if (variant == Variant::Hybrid) {
        const int pq = mp.arch.circuit.param_count();
        for (int i = 0; i < pq; ++i)
            mp.flat[mp.arch.circuit_offset() + i] =
                (2.0 * next_uniform(rng) - 1.0) * 0.1;
        fill_affine(rng,
                    std::span<double>(mp.flat).subspan(
                        mp.arch.head_offset(),
                        static_cast<std::size_t>(mp.arch.head_in) *
                                mp.arch.head_out + mp.arch.head_out),
                    mp.arch.head_out, mp.arch.head_in);
    }
    return mp;
}

ModelParams hybrid_from_classical(const ModelParams& classical,
                                  std::uint64_t seed) {
    if (classical.arch.variant != Variant::Classical)
        throw std::invalid_argument(
            "hybrid_from_classical: classical checkpoint required");
    ModelParams mp = init_params(seed, Variant::Hybrid);
    // trunk layers coincide for both variants: everything up to the 16-wide
    // layer, i.e. all classical layers except the final 16->4 head
    for (int l = 0; l < mp.arch.n_layers(); ++l) {
        const std::size_t n = mp.arch.layer_param_count(l);
        const std::size_t src = classical.arch.layer_offset(l);
        const std::size_t dst = mp.arch.layer_offset(l);
        for (std::size_t i = 0; i < n; ++i) mp.flat[dst + i] = classical.flat[src + i];
    }
    return mp;
}

std::array<Var, 4> tape_forward(Tape& tape, const ModelParams& mp,
                                const std::array<double, 3>& point,
                                bool spatial) {
    if (mp.flat.size() != mp.arch.total_params())
        throw std::invalid_argument("tape_forward: parameter size mismatch");

    Var cur;
    if (spatial) {
        const std::array<Dual, 3> seeded = seed_spatial(point);
        cur = tape.constant(seeded[0]);
        tape.constant(seeded[1]);
        tape.constant(seeded[2]);
    } else {
        cur = tape.constant(point[0]);
        tape.constant(point[1]);
        tape.constant(point[2]);
    }

    const int L = mp.arch.n_layers();
    int width = 3;
    const bool hybrid = mp.arch.variant == Variant::Hybrid;
    for (int l = 0; l < L; ++l) {
        const int m = mp.arch.layer_widths[l + 1];
        Var y = tape.affine(cur, width, static_cast<int>(mp.arch.layer_offset(l)),
                            m, spatial);
        cur = l + 1 < L ? tape.silu_vec(y, m, spatial) : y;
        width = m;
    }

    if (!hybrid)
        return {tape.at(cur, 0), tape.at(cur, 1), tape.at(cur, 2),
                tape.at(cur, 3)};

    std::vector<Var> angles;
    angles.reserve(width);
    for (int i = 0; i < width; ++i)
        angles.push_back(
            tape.mul_const(tape.unary(UnaryOp::Tanh, tape.at(cur, i)),
                           std::numbers::pi));
    std::vector<Var> leaves;
    const int pq = mp.arch.circuit.param_count();
    leaves.reserve(pq);
    const int coff = static_cast<int>(mp.arch.circuit_offset());
    for (int j = 0; j < pq; ++j) leaves.push_back(tape.param(coff + j));

    std::vector<Var> z = run_circuit<Var>(mp.arch.circuit,
                                          std::span<const Var>(angles),
                                          std::span<const Var>(leaves));
    Var zpack = tape.pack(std::span<const Var>(z));
    Var out = tape.affine(zpack, mp.arch.head_in,
                          static_cast<int>(mp.arch.head_offset()),
                          mp.arch.head_out, spatial);
    return {tape.at(out, 0), tape.at(out, 1), tape.at(out, 2), tape.at(out, 3)};
}

void save_checkpoint(const ModelParams& mp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    out << "qpinn-checkpoint 1\n";
    out << "variant " << to_string(mp.arch.variant) << "\n";
    out << "layers";
    for (int w : mp.arch.layer_widths) out << ' ' << w;
    out << "\n";
    if (mp.arch.variant == Variant::Hybrid) {
        const CircuitSpec& c = mp.arch.circuit;
        out << "circuit qubits " << c.n_qubits << "\n";
        for (const CircuitBlock& b : c.blocks) {
            out << "block enc";
            for (auto [q, f] : b.encodings) out << ' ' << q << ':' << f;
            out << " rot";
            for (auto [q, p] : b.rotations) out << ' ' << q << ':' << p;
            out << " cnot";
            for (auto [cq, t] : b.entanglers) out << ' ' << cq << '>' << t;
            out << "\n";
        }
        out << "readout";
        for (int q : c.readout) out << ' ' << q;
        out << "\n";
        out << "head " << mp.arch.head_in << ' ' << mp.arch.head_out << "\n";
    }
    out << "params " << mp.flat.size() << "\n";
    out << std::setprecision(17);
    for (double v : mp.flat) out << v << "\n";
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

namespace {

std::string expect_word(std::istream& in, const std::string& want,
                        const std::string& path) {
    std::string got;
    in >> got;
    if (got != want)
        throw std::runtime_error("checkpoint " + path + ": expected '" + want +
                                 "', got '" + got + "'");
    return got;
}

}  // namespace

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    expect_word(in, "qpinn-checkpoint", path);
    int version = 0;
    in >> version;
    if (version != 1)
        throw std::runtime_error("checkpoint " + path + ": unsupported version");

    ModelParams mp;
    expect_word(in, "variant", path);
    std::string vs;
    in >> vs;
    mp.arch.variant = variant_from_string(vs);

    expect_word(in, "layers", path);
    std::string line;
    std::getline(in, line);
    {
        std::istringstream iss(line);
        int w;
        while (iss >> w) mp.arch.layer_widths.push_back(w);
    }
    if (mp.arch.layer_widths.size() < 2)
        throw std::runtime_error("checkpoint " + path + ": bad layer list");

    if (mp.arch.variant == Variant::Hybrid) {
        expect_word(in, "circuit", path);
        expect_word(in, "qubits", path);
        in >> mp.arch.circuit.n_qubits;
        std::getline(in, line);
        std::string word;
        while (in >> word) {
            if (word == "readout") break;
            if (word != "block")
                throw std::runtime_error("checkpoint " + path +
                                         ": expected block/readout, got " + word);
            std::getline(in, line);
            std::istringstream iss(line);
            expect_word(iss, "enc", path);
            CircuitBlock blk;
            std::string tok;
            std::vector<std::string> enc_toks, rot_toks, cnot_toks;
            std::vector<std::string>* cur = &enc_toks;
            while (iss >> tok) {
                if (tok == "rot") {
                    cur = &rot_toks;
                } else if (tok == "cnot") {
                    cur = &cnot_toks;
                } else {
                    cur->push_back(tok);
                }
            }
            auto to_pairs = [&](const std::vector<std::string>& toks, char sep) {
                std::vector<std::pair<int, int>> out;
                for (const std::string& t : toks) {
                    const std::size_t at = t.find(sep);
                    if (at == std::string::npos)
                        throw std::runtime_error("checkpoint " + path +
                                                 ": malformed token " + t);
                    out.emplace_back(std::stoi(t.substr(0, at)),
                                     std::stoi(t.substr(at + 1)));
                }
                return out;
            };
            blk.encodings = to_pairs(enc_toks, ':');
            blk.rotations = to_pairs(rot_toks, ':');
            blk.entanglers = to_pairs(cnot_toks, '>');
            mp.arch.circuit.blocks.push_back(std::move(blk));
        }
        // word == "readout" falls through to here
        std::getline(in, line);
        {
            std::istringstream iss(line);
            int q;
            while (iss >> q) mp.arch.circuit.readout.push_back(q);
        }
        mp.arch.circuit.validate();
        expect_word(in, "head", path);
        in >> mp.arch.head_in >> mp.arch.head_out;
    }

    expect_word(in, "params", path);
    std::size_t count = 0;
    in >> count;
    if (count != mp.arch.total_params())
        throw std::runtime_error("checkpoint " + path +
                                 ": parameter count does not match architecture");
    mp.flat.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (!(in >> mp.flat[i]))
            throw std::runtime_error("checkpoint " + path +
                                     ": truncated parameter list");
    }
    return mp;
}

}  // namespace qpinn
