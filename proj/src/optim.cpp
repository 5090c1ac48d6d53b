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

#include "qpinn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qpinn/kernels.hpp"

namespace qpinn {

AdamState::AdamState(std::size_t n, AdamConfig c)
    : cfg(c), m(n, 0.0), v(n, 0.0) {}

void adam_step(AdamState& state, std::span<double> params,
               std::span<const double> grad) {
    const std::size_t n = state.m.size();
    if (params.size() != n || grad.size() != n)
        throw std::invalid_argument("adam_step: size mismatch");
    ++state.step_count;
    const double lr_t =
        state.cfg.lr * std::pow(state.cfg.lr_decay, state.step_count - 1);
    const double bias1 = 1.0 - std::pow(state.cfg.beta1, state.step_count);
    const double bias2 = 1.0 - std::pow(state.cfg.beta2, state.step_count);
    active_kernels().adam_update(params.data(), state.m.data(), state.v.data(),
                                 grad.data(), static_cast<int>(n), lr_t,
                                 state.cfg.beta1, state.cfg.beta2,
                                 state.cfg.eps, bias1, bias2);
}

LbfgsState::LbfgsState(std::size_t n, LbfgsConfig c) : cfg(c), g(n, 0.0) {}

void LbfgsState::clear_history() {
    pairs.clear();
    rho.clear();
}

namespace {

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// d = -H g by the standard two-loop recursion; H0 = gamma I with
// gamma = s.y / y.y of the most recent stored pair.
std::vector<double> two_loop_direction(const LbfgsState& state) {
    const auto& kt = active_kernels();
    const int n = static_cast<int>(state.g.size());
    std::vector<double> q(state.g.begin(), state.g.end());
    const int h = static_cast<int>(state.pairs.size());
    std::vector<double> alpha(h, 0.0);
    for (int i = h - 1; i >= 0; --i) {
        const auto& [s, y] = state.pairs[i];
        alpha[i] = state.rho[i] * kt.dot(s.data(), q.data(), n);
        kt.axpy(-alpha[i], y.data(), q.data(), n);
    }
    if (h > 0) {
        const auto& [s, y] = state.pairs.back();
        const double yy = kt.dot(y.data(), y.data(), n);
        const double sy = kt.dot(s.data(), y.data(), n);
        if (yy > 0.0) kt.scal(sy / yy, q.data(), n);
    }
    for (int i = 0; i < h; ++i) {
        const auto& [s, y] = state.pairs[i];
        const double beta = state.rho[i] * kt.dot(y.data(), q.data(), n);
        kt.axpy(alpha[i] - beta, s.data(), q.data(), n);
    }
    kt.scal(-1.0, q.data(), n);
    return q;
}

struct Probe {
    double f = 0.0, dphi = 0.0;
};

}  // namespace

LbfgsStepResult lbfgs_step(LbfgsState& state, std::vector<double>& params,
                           const LossFn& fn) {
    const auto& kt = active_kernels();
    const std::size_t n = params.size();
    if (state.g.size() != n)
        throw std::invalid_argument("lbfgs_step: size mismatch");

    LbfgsStepResult res;
    if (!state.have_eval) {
        state.f = fn(params, state.g);
        state.have_eval = true;
        ++res.evals;
    }
    res.loss = state.f;

    if (inf_norm(state.g) == 0.0) {
        res.note = "stationary point: zero gradient";
        return res;
    }

    std::vector<double> d = two_loop_direction(state);
    double dphi0 = kt.dot(state.g.data(), d.data(), static_cast<int>(n));
    if (!(dphi0 < 0.0)) {
        // not a descent direction; fall back to steepest descent
        state.clear_history();
        for (std::size_t i = 0; i < n; ++i) d[i] = -state.g[i];
        dphi0 = -kt.dot(state.g.data(), state.g.data(), static_cast<int>(n));
    }

    const std::vector<double> x0 = params;
    const double f0 = state.f;
    std::vector<double> g_trial(n, 0.0);
    const auto eval_at = [&](double a) -> Probe {
        for (std::size_t i = 0; i < n; ++i) params[i] = x0[i] + a * d[i];
        double f = fn(params, g_trial);
        ++res.evals;
        // a non-finite trial must never satisfy the acceptance conditions;
        // +inf steers the bracketing back toward the finite region
        if (!std::isfinite(f)) f = std::numeric_limits<double>::infinity();
        return {f, kt.dot(g_trial.data(), d.data(), static_cast<int>(n))};
    };

    double accepted = -1.0;
    double f_acc = f0;

    if (state.cfg.line_search == LbfgsConfig::LineSearch::ExactQuadratic) {
        // assumes the objective is quadratic along d; intended for tests
        const Probe p1 = eval_at(1.0);
        const double curv = 2.0 * (p1.f - f0 - dphi0);
        if (curv > 0.0) {
            const double astar = -dphi0 / curv;
            const Probe ps = eval_at(astar);
            accepted = astar;
            f_acc = ps.f;
        } else if (p1.f < f0) {
            accepted = 1.0;
            f_acc = p1.f;
        }
    } else {
        // strong Wolfe bracketing + zoom
        const double c1 = state.cfg.c1, c2 = state.cfg.c2;
        const int max_evals = state.cfg.max_line_search;
        double a_prev = 0.0, f_prev = f0, dphi_prev = dphi0;
        double a = state.pairs.empty()
                       ? std::min(1.0, 1.0 / std::max(1e-12, inf_norm(state.g)))
                       : 1.0;
        double lo = -1.0, hi = -1.0, f_lo = 0.0, dphi_lo = 0.0;
        bool zooming = false;
        while (res.evals < max_evals) {
            if (!zooming) {
                const Probe p = eval_at(a);
                if (p.f > f0 + c1 * a * dphi0 || (a_prev > 0.0 && p.f >= f_prev)) {
                    lo = a_prev;
                    f_lo = f_prev;
                    dphi_lo = dphi_prev;
                    hi = a;
                    zooming = true;
                    continue;
                }
                if (std::abs(p.dphi) <= -c2 * dphi0) {
                    accepted = a;
                    f_acc = p.f;
                    break;
                }
                if (p.dphi >= 0.0) {
                    lo = a;
                    f_lo = p.f;
                    dphi_lo = p.dphi;
                    hi = a_prev;
                    zooming = true;
                    continue;
                }
                a_prev = a;
                f_prev = p.f;
                dphi_prev = p.dphi;
                a *= 2.0;
                if (a > 1e6) break;
            } else {
                const double mid = 0.5 * (lo + hi);
                const Probe p = eval_at(mid);
                if (p.f > f0 + c1 * mid * dphi0 || p.f >= f_lo) {
                    hi = mid;
                } else {
                    if (std::abs(p.dphi) <= -c2 * dphi0) {
                        accepted = mid;
                        f_acc = p.f;
                        break;
                    }
                    if (p.dphi * (hi - lo) >= 0.0) hi = lo;
                    lo = mid;
                    f_lo = p.f;
                    dphi_lo = p.dphi;
                }
                if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo)))
                    break;
            }
        }
        (void)dphi_lo;
    }

    if (accepted < 0.0) {
        params = x0;
        state.clear_history();
        state.have_eval = true;  // cache still matches x0
        res.note = "line search failed; step skipped, history cleared";
        res.loss = f0;
        return res;
    }

    // every accept path breaks straight after its probe, so g_trial already
    // holds the gradient at `accepted`; just pin params to that point
    for (std::size_t i = 0; i < n; ++i) params[i] = x0[i] + accepted * d[i];
    const double f_new = f_acc;

    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = params[i] - x0[i];
        y[i] = g_trial[i] - state.g[i];
    }
    const double sy = kt.dot(s.data(), y.data(), static_cast<int>(n));
    const double sn = std::sqrt(kt.dot(s.data(), s.data(), static_cast<int>(n)));
    const double yn = std::sqrt(kt.dot(y.data(), y.data(), static_cast<int>(n)));
    if (sy > 1e-12 * sn * yn) {
        state.pairs.emplace_back(std::move(s), std::move(y));
        state.rho.push_back(1.0 / sy);
        while (static_cast<int>(state.pairs.size()) > state.cfg.history) {
            state.pairs.pop_front();
            state.rho.pop_front();
        }
    }
    state.f = f_new;
    state.g = g_trial;
    state.have_eval = true;
    res.loss = f_new;
    res.step_taken = true;
    return res;
}

}  // namespace qpinn
