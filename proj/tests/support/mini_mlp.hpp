/// Small arbitrary-width SiLU MLPs for autodiff checks: a plain templated
/// forward pass (double / Dual) plus the equivalent tape recording, with a
/// Navier-Stokes-shaped composite loss on the four outputs. Used by the
/// tape unit tests and the autodiff acceptance criterion.

#pragma once

#include <array>
#include <random>
#include <vector>

#include "qpinn/dual.hpp"
#include "qpinn/physics.hpp"
#include "qpinn/tape.hpp"

namespace qpinn::test {

struct MiniMlp {
    std::vector<int> widths;     // including input width 3, output width 4
    std::vector<double> params;  // per layer: W row-major then bias

    static std::size_t param_count(const std::vector<int>& widths) {
        std::size_t n = 0;
        for (std::size_t l = 0; l + 1 < widths.size(); ++l)
            n += static_cast<std::size_t>(widths[l + 1]) * widths[l] +
                 widths[l + 1];
        return n;
    }

    static MiniMlp random(std::mt19937_64& rng, std::vector<int> widths,
                          double scale = 0.8) {
        MiniMlp m;
        m.widths = std::move(widths);
        m.params.resize(param_count(m.widths));
        std::uniform_real_distribution<double> u(-scale, scale);
        for (double& p : m.params) p = u(rng);
        return m;
    }

    std::size_t layer_offset(std::size_t l) const {
        std::size_t off = 0;
        for (std::size_t i = 0; i < l; ++i)
            off += static_cast<std::size_t>(widths[i + 1]) * widths[i] +
                   widths[i + 1];
        return off;
    }

    template <class S>
    std::vector<S> forward(const std::array<S, 3>& x) const {
        std::vector<S> cur(x.begin(), x.end());
        for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
            const int k = widths[l], m = widths[l + 1];
            const double* W = params.data() + layer_offset(l);
            const double* b = W + static_cast<std::size_t>(m) * k;
            std::vector<S> next;
            next.reserve(m);
            for (int i = 0; i < m; ++i) {
                S acc = constant_like(cur[0], b[i]);
                for (int j = 0; j < k; ++j) acc = acc + cur[j] * W[i * k + j];
                next.push_back(acc);
            }
            cur.swap(next);
            if (l + 2 < widths.size())
                for (S& v : cur) v = silu(v);
        }
        return cur;
    }

    /// Same network recorded with fused tape nodes. The tape must already be
    /// bound to `params`.
    Var tape_outputs(Tape& tape, const std::array<double, 3>& pt,
                     bool spatial) const {
        Var cur;
        if (spatial) {
            const auto seeded = seed_spatial(pt);
            cur = tape.constant(seeded[0]);
            tape.constant(seeded[1]);
            tape.constant(seeded[2]);
        } else {
            cur = tape.constant(pt[0]);
            tape.constant(pt[1]);
            tape.constant(pt[2]);
        }
        for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
            const int k = widths[l], m = widths[l + 1];
            Var y = tape.affine(cur, k, static_cast<int>(layer_offset(l)), m,
                                spatial);
            cur = l + 2 < widths.size() ? tape.silu_vec(y, m, spatial) : y;
        }
        return cur;
    }
};

/// Mean over points of the squared NS residuals of the four outputs
/// (outputs 0..2 as velocity, 3 as pressure), computed through the
/// forward-mode path. This is the reference value the tape gradient is
/// finite-differenced against.
inline double mini_pinn_loss(const MiniMlp& m,
                             const std::vector<std::array<double, 3>>& pts) {
    const FluidParams fluid;
    double acc = 0.0;
    for (const auto& pt : pts) {
        const auto x = seed_spatial(pt);
        const auto out = m.forward<Dual>({x[0], x[1], x[2]});
        const std::array<Dual, 3> v = {out[0], out[1], out[2]};
        const auto r = ns_residual(v, out[3], fluid);
        const double rc = continuity_residual(v);
        acc += r[0] * r[0] + r[1] * r[1] + r[2] * r[2] + rc * rc;
    }
    return acc / static_cast<double>(pts.size());
}

/// The same loss recorded on a tape; returns the accumulated gradient.
inline double mini_pinn_loss_grad(const MiniMlp& m,
                                  const std::vector<std::array<double, 3>>& pts,
                                  std::vector<double>& grad) {
    grad.assign(m.params.size(), 0.0);
    Tape tape;
    tape.bind_params(m.params);
    double acc = 0.0;
    const double inv_n = 1.0 / static_cast<double>(pts.size());
    for (const auto& pt : pts) {
        tape.reset();
        Var out = m.tape_outputs(tape, pt, /*spatial=*/true);
        std::array<Var, 3> vval;
        for (int j = 0; j < 3; ++j) vval[j] = tape.value_only(tape.at(out, j));
        Var total;
        for (int i = 0; i < 3; ++i) {
            Var conv = tape.mul(vval[0], tape.extract_grad(tape.at(out, i), 0));
            conv = tape.add(
                conv, tape.mul(vval[1], tape.extract_grad(tape.at(out, i), 1)));
            conv = tape.add(
                conv, tape.mul(vval[2], tape.extract_grad(tape.at(out, i), 2)));
            Var visc = tape.add(tape.add(tape.extract_hess(tape.at(out, i), 0),
                                         tape.extract_hess(tape.at(out, i), 1)),
                                tape.extract_hess(tape.at(out, i), 2));
            Var r = tape.sub(visc, conv);
            r = tape.sub(r, tape.extract_grad(tape.at(out, 3), i));
            Var r2 = tape.unary(UnaryOp::Square, r);
            total = i == 0 ? r2 : tape.add(total, r2);
        }
        Var div = tape.add(tape.add(tape.extract_grad(tape.at(out, 0), 0),
                                    tape.extract_grad(tape.at(out, 1), 1)),
                           tape.extract_grad(tape.at(out, 2), 2));
        total = tape.add(total, tape.unary(UnaryOp::Square, div));
        acc += tape.scalar_value(total);
        tape.backward(total, grad, inv_n);
    }
    return acc * inv_n;
}

}  // namespace qpinn::test
