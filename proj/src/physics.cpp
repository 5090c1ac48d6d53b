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

#include "qpinn/physics.hpp"

#include <cmath>
#include <iostream>
#include <sstream>
#include <iomanip>
#include <stdexcept>
#include <thread>
#include <vector>

#include "qpinn/tape.hpp"

namespace qpinn {

void FluidParams::validate() const {
    if (!(nu > 0.0) || !(rho > 0.0))
        throw std::invalid_argument("FluidParams: nu and rho must be positive");
}

bool LossBreakdown::finite() const {
    return std::isfinite(momentum[0]) && std::isfinite(momentum[1]) &&
           std::isfinite(momentum[2]) && std::isfinite(continuity) &&
           std::isfinite(bc_wall) && std::isfinite(bc_inlet) &&
           std::isfinite(bc_outlet) && std::isfinite(total);
}

const char* LossBreakdown::csv_header() {
    return "epoch,momentum_x,momentum_y,momentum_z,continuity,bc_wall,"
           "bc_inlet,bc_outlet,total";
}

std::string LossBreakdown::csv_row(long epoch) const {
    std::ostringstream out;
    out << std::setprecision(17);
    out << epoch << ',' << momentum[0] << ',' << momentum[1] << ','
        << momentum[2] << ',' << continuity << ',' << bc_wall << ','
        << bc_inlet << ',' << bc_outlet << ',' << total;
    return out.str();
}

std::array<double, 3> ns_residual(const std::array<Dual, 3>& v, const Dual& p,
                                  const FluidParams& fluid) {
    fluid.validate();
    for (const Dual& c : v)
        if (!c.finite())
            throw std::invalid_argument("ns_residual: non-finite velocity payload");
    if (!p.finite())
        throw std::invalid_argument("ns_residual: non-finite pressure payload");
    std::array<double, 3> r;
    for (int i = 0; i < 3; ++i) {
        double convection = 0.0;
        for (int j = 0; j < 3; ++j) convection += v[j].value() * v[i].grad(j);
        r[i] = -convection + fluid.nu * v[i].laplacian() -
               p.grad(i) / fluid.rho;
    }
    return r;
}

double continuity_residual(const std::array<Dual, 3>& v) {
    for (const Dual& c : v)
        if (!c.finite())
            throw std::invalid_argument(
                "continuity_residual: non-finite velocity payload");
    return v[0].grad(0) + v[1].grad(1) + v[2].grad(2);
}

namespace {

void warn_group(const char* name) {
    std::cerr << "[qpinn] warning: no " << name
              << " points in this evaluation; its loss term is 0\n";
}

struct GroupCounts {
    std::size_t fluid = 0, wall = 0, inlet = 0, outlet = 0;
};

GroupCounts count_groups(const PointCloud& cloud,
                         std::span<const std::size_t> subset) {
    GroupCounts g;
    for (std::size_t idx : subset) {
        switch (cloud.region[idx]) {
            case Region::Fluid: ++g.fluid; break;
            case Region::Wall: ++g.wall; break;
            case Region::Inlet: ++g.inlet; break;
            case Region::Outlet: ++g.outlet; break;
        }
    }
    return g;
}

struct TermSums {
    std::array<double, 3> mom = {0, 0, 0};
    double cont = 0, wall = 0, inlet = 0, outlet = 0;

    void merge(const TermSums& o) {
        for (int i = 0; i < 3; ++i) mom[i] += o.mom[i];
        cont += o.cont;
        wall += o.wall;
        inlet += o.inlet;
        outlet += o.outlet;
    }
};

LossBreakdown finish(const TermSums& sums, const GroupCounts& g,
                     const LossWeights& weights, bool warn_empty) {
    LossBreakdown out;
    if (g.fluid > 0) {
        for (int i = 0; i < 3; ++i) out.momentum[i] = sums.mom[i] / g.fluid;
        out.continuity = sums.cont / g.fluid;
    } else if (warn_empty) {
        warn_group("fluid");
    }
    if (g.wall > 0)
        out.bc_wall = sums.wall / g.wall;
    else if (warn_empty)
        warn_group("wall");
    if (g.inlet > 0)
        out.bc_inlet = sums.inlet / g.inlet;
    else if (warn_empty)
        warn_group("inlet");
    if (g.outlet > 0)
        out.bc_outlet = sums.outlet / g.outlet;
    else if (warn_empty)
        warn_group("outlet");
    const auto& w = weights.w;
    out.total = w[0] * out.momentum[0] + w[1] * out.momentum[1] +
                w[2] * out.momentum[2] + w[3] * out.continuity +
                w[4] * out.bc_wall + w[5] * out.bc_inlet + w[6] * out.bc_outlet;
    return out;
}

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

}  // namespace

BcTerms bc_loss(const PointCloud& cloud,
                std::span<const std::array<double, 4>> fields,
                bool warn_empty) {
    if (fields.size() != cloud.size())
        throw std::invalid_argument("bc_loss: fields not aligned with cloud");
    BcTerms t;
    std::size_t n_wall = 0, n_inlet = 0, n_outlet = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& f = fields[i];
        switch (cloud.region[i]) {
            case Region::Fluid:
                break;
            case Region::Wall:
                t.wall += f[0] * f[0] + f[1] * f[1] + f[2] * f[2];
                ++n_wall;
                break;
            case Region::Inlet: {
                const auto& v0 = cloud.bc_velocity[i];
                const double dx = f[0] - v0[0], dy = f[1] - v0[1],
                             dz = f[2] - v0[2];
                t.inlet += dx * dx + dy * dy + dz * dz;
                ++n_inlet;
                break;
            }
            case Region::Outlet: {
                const double dp = f[3] - cloud.bc_pressure[i];
                t.outlet += dp * dp;
                ++n_outlet;
                break;
            }
        }
    }
    if (n_wall)
        t.wall /= n_wall;
    else if (warn_empty)
        warn_group("wall");
    if (n_inlet)
        t.inlet /= n_inlet;
    else if (warn_empty)
        warn_group("inlet");
    if (n_outlet)
        t.outlet /= n_outlet;
    else if (warn_empty)
        warn_group("outlet");
    return t;
}

LossBreakdown total_loss(const PointCloud& cloud, const ModelParams& mp,
                         const FluidParams& fluid, const LossWeights& weights,
                         bool warn_empty) {
    fluid.validate();
    const auto subset = all_indices(cloud.size());
    const GroupCounts g = count_groups(cloud, subset);
    TermSums sums;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& pt = cloud.points[i];
        if (cloud.region[i] == Region::Fluid) {
            const auto x = seed_spatial(pt);
            const Prediction<Dual> pred = forward_fields<Dual>(mp, x);
            const auto r = ns_residual(pred.velocity, pred.pressure, fluid);
            for (int c = 0; c < 3; ++c) sums.mom[c] += r[c] * r[c];
            const double rc = continuity_residual(pred.velocity);
            sums.cont += rc * rc;
        } else {
            const Prediction<double> pred = forward_fields<double>(mp, pt);
            switch (cloud.region[i]) {
                case Region::Wall:
                    sums.wall += pred.velocity[0] * pred.velocity[0] +
                                 pred.velocity[1] * pred.velocity[1] +
                                 pred.velocity[2] * pred.velocity[2];
                    break;
                case Region::Inlet: {
                    const auto& v0 = cloud.bc_velocity[i];
                    for (int c = 0; c < 3; ++c) {
                        const double d = pred.velocity[c] - v0[c];
                        sums.inlet += d * d;
                    }
                    break;
                }
                case Region::Outlet: {
                    const double dp = pred.pressure - cloud.bc_pressure[i];
                    sums.outlet += dp * dp;
                    break;
                }
                case Region::Fluid:
                    break;
            }
        }
    }
    return finish(sums, g, weights, warn_empty);
}

namespace {

// Records the seven-term loss contribution of one point and runs the
// reverse sweep with the weighted group-mean seed.
void accumulate_point(Tape& tape, const PointCloud& cloud, std::size_t idx,
                      const ModelParams& mp, const FluidParams& fluid,
                      const LossWeights& weights, const GroupCounts& g,
                      TermSums& sums, std::span<double> grad) {
    const auto& pt = cloud.points[idx];
    const auto& w = weights.w;
    tape.reset();
    switch (cloud.region[idx]) {
        case Region::Fluid: {
            const auto out = tape_forward(tape, mp, pt, /*spatial=*/true);
            std::array<Var, 3> vval;
            for (int j = 0; j < 3; ++j) vval[j] = tape.value_only(out[j]);
            Var weighted;
            bool first = true;
            std::array<double, 4> sq;
            for (int i = 0; i < 3; ++i) {
                Var conv = tape.mul(vval[0], tape.extract_grad(out[i], 0));
                conv = tape.add(conv,
                                tape.mul(vval[1], tape.extract_grad(out[i], 1)));
                conv = tape.add(conv,
                                tape.mul(vval[2], tape.extract_grad(out[i], 2)));
                Var visc = tape.add(
                    tape.add(tape.extract_hess(out[i], 0),
                             tape.extract_hess(out[i], 1)),
                    tape.extract_hess(out[i], 2));
                Var r = tape.sub(tape.mul_const(visc, fluid.nu), conv);
                r = tape.sub(r, tape.mul_const(tape.extract_grad(out[3], i),
                                               1.0 / fluid.rho));
                Var r2 = tape.unary(UnaryOp::Square, r);
                sq[i] = tape.scalar_value(r2);
                Var term = tape.mul_const(r2, w[i]);
                weighted = first ? term : tape.add(weighted, term);
                first = false;
            }
            Var div = tape.add(tape.add(tape.extract_grad(out[0], 0),
                                        tape.extract_grad(out[1], 1)),
                               tape.extract_grad(out[2], 2));
            Var div2 = tape.unary(UnaryOp::Square, div);
            sq[3] = tape.scalar_value(div2);
            weighted = tape.add(weighted, tape.mul_const(div2, w[3]));
            tape.backward(weighted, grad, 1.0 / static_cast<double>(g.fluid));
            for (int i = 0; i < 3; ++i) sums.mom[i] += sq[i];
            sums.cont += sq[3];
            break;
        }
        case Region::Wall: {
            const auto out = tape_forward(tape, mp, pt, /*spatial=*/false);
            Var sumsq = tape.add(
                tape.add(tape.unary(UnaryOp::Square, out[0]),
                         tape.unary(UnaryOp::Square, out[1])),
                tape.unary(UnaryOp::Square, out[2]));
            sums.wall += tape.scalar_value(sumsq);
            tape.backward(sumsq, grad, w[4] / static_cast<double>(g.wall));
            break;
        }
        case Region::Inlet: {
            const auto out = tape_forward(tape, mp, pt, /*spatial=*/false);
            const auto& v0 = cloud.bc_velocity[idx];
            Var sumsq;
            for (int c = 0; c < 3; ++c) {
                Var d = tape.add_const(out[c], -v0[c]);
                Var d2 = tape.unary(UnaryOp::Square, d);
                sumsq = c == 0 ? d2 : tape.add(sumsq, d2);
            }
            sums.inlet += tape.scalar_value(sumsq);
            tape.backward(sumsq, grad, w[5] / static_cast<double>(g.inlet));
            break;
        }
        case Region::Outlet: {
            const auto out = tape_forward(tape, mp, pt, /*spatial=*/false);
            Var d = tape.add_const(out[3], -cloud.bc_pressure[idx]);
            Var d2 = tape.unary(UnaryOp::Square, d);
            sums.outlet += tape.scalar_value(d2);
            tape.backward(d2, grad, w[6] / static_cast<double>(g.outlet));
            break;
        }
    }
}

}  // namespace

LossBreakdown loss_and_gradient(const PointCloud& cloud,
                                std::span<const std::size_t> subset,
                                const ModelParams& mp, const FluidParams& fluid,
                                const LossGradOptions& opt,
                                std::span<double> grad) {
    fluid.validate();
    if (grad.size() != mp.flat.size())
        throw std::invalid_argument(
            "loss_and_gradient: gradient buffer size mismatch");
    std::fill(grad.begin(), grad.end(), 0.0);

    std::vector<std::size_t> all;
    if (subset.empty()) {
        all = all_indices(cloud.size());
        subset = all;
    }
    const GroupCounts g = count_groups(cloud, subset);

    const int threads =
        std::max(1, std::min<int>(opt.threads, static_cast<int>(subset.size())));
    std::vector<TermSums> sums(threads);
    if (threads == 1) {
        Tape tape;
        tape.bind_params(mp.flat);
        for (std::size_t idx : subset)
            accumulate_point(tape, cloud, idx, mp, fluid, opt.weights, g,
                             sums[0], grad);
    } else {
        // one tape and one gradient buffer per thread; partial results merge
        // in thread order below so a fixed thread count reproduces bitwise
        std::vector<std::vector<double>> tgrad(
            threads, std::vector<double>(grad.size(), 0.0));
        std::vector<std::thread> pool;
        const std::size_t chunk = (subset.size() + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                Tape tape;
                tape.bind_params(mp.flat);
                const std::size_t lo = t * chunk;
                const std::size_t hi = std::min(subset.size(), lo + chunk);
                for (std::size_t s = lo; s < hi; ++s)
                    accumulate_point(tape, cloud, subset[s], mp, fluid,
                                     opt.weights, g, sums[t], tgrad[t]);
            });
        }
        for (std::thread& th : pool) th.join();
        for (int t = 0; t < threads; ++t)
            for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += tgrad[t][i];
        for (int t = 1; t < threads; ++t) sums[0].merge(sums[t]);
    }
    return finish(sums[0], g, opt.weights, opt.warn_empty);
}

}  // namespace qpinn
