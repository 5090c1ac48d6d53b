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
 * Steady incompressible Navier-Stokes residuals and the composite loss.
 *
 * Momentum: -(v . grad) v + nu * lap(v) - (1/rho) grad p = 0, per component.
 * Continuity: div v = 0.
 *
 * The composite loss has seven terms: mean squared residual of each momentum
 * component and of continuity over the fluid points, plus the no-slip wall,
 * inlet-profile and outlet-pressure mean squared mismatches over their point
 * groups. Terms are reported unweighted; the optimized total is the
 * weighted sum (all weights default to 1).
 */

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

#include "qpinn/dual.hpp"
#include "qpinn/geometry.hpp"
#include "qpinn/network.hpp"

namespace qpinn {

struct FluidParams {
    double nu = 1.0;   // kinematic viscosity
    double rho = 1.0;  // density

    void validate() const;
};

/// Order: momentum x/y/z, continuity, wall, inlet, outlet.
struct LossWeights {
    std::array<double, 7> w = {1, 1, 1, 1, 1, 1, 1};
};

struct LossBreakdown {
    std::array<double, 3> momentum = {0, 0, 0};
    double continuity = 0;
    double bc_wall = 0;
    double bc_inlet = 0;
    double bc_outlet = 0;
    double total = 0;

    bool finite() const;
    static const char* csv_header();  // epoch,momentum_x,...,total
    std::string csv_row(long epoch) const;
};

/// Momentum residual vector from the derivative payloads of (v, p).
/// Rejects non-finite payloads.
std::array<double, 3> ns_residual(const std::array<Dual, 3>& v, const Dual& p,
                                  const FluidParams& fluid);

/// div v from the gradient payloads.
double continuity_residual(const std::array<Dual, 3>& v);

struct BcTerms {
    double wall = 0, inlet = 0, outlet = 0;
};

/// Mean squared boundary mismatches. `fields` holds (vx, vy, vz, p) per
/// cloud point. Empty groups contribute 0 (with a warning when enabled).
BcTerms bc_loss(const PointCloud& cloud,
                std::span<const std::array<double, 4>> fields,
                bool warn_empty = true);

/// Full composite loss by direct evaluation (no parameter gradients):
/// Dual-mode forward at fluid points, value-mode at boundary points.
LossBreakdown total_loss(const PointCloud& cloud, const ModelParams& mp,
                         const FluidParams& fluid,
                         const LossWeights& weights = {},
                         bool warn_empty = true);

struct LossGradOptions {
    LossWeights weights;
    int threads = 1;
    bool warn_empty = false;
};

/// Loss breakdown plus dTotal/dparams via per-point tapes. `subset` selects
/// cloud indices (empty means every point); group means are taken within
/// the subset. `grad` is zeroed first and must match the parameter count.
/// Per-thread partial sums merge in a fixed order, so results are
/// reproducible for a fixed thread count.
LossBreakdown loss_and_gradient(const PointCloud& cloud,
                                std::span<const std::size_t> subset,
                                const ModelParams& mp, const FluidParams& fluid,
                                const LossGradOptions& opt,
                                std::span<double> grad);

}  // namespace qpinn
