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
 * Optimizers over the flat parameter vector: bias-corrected Adam and L-BFGS
 * with two-loop recursion and a strong-Wolfe line search.
 */

#pragma once

#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qpinn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double lr_decay = 1.0;  // per-step multiplier; 1 = constant schedule
};

struct AdamState {
    AdamConfig cfg;
    std::vector<double> m, v;
    long step_count = 0;

    explicit AdamState(std::size_t n, AdamConfig cfg = {});
};

/// Standard bias-corrected update; params unchanged when grad is zero from
/// a fresh state.
void adam_step(AdamState& state, std::span<double> params,
               std::span<const double> grad);

/// Evaluates loss at `params` and writes the gradient into the second span.
using LossFn =
    std::function<double(std::span<const double>, std::span<double>)>;

struct LbfgsConfig {
    int history = 10;
    double c1 = 1e-4;  // Armijo
    double c2 = 0.9;   // curvature
    int max_line_search = 25;
    enum class LineSearch { StrongWolfe, ExactQuadratic } line_search =
        LineSearch::StrongWolfe;
};

struct LbfgsState {
    LbfgsConfig cfg;
    std::deque<std::pair<std::vector<double>, std::vector<double>>> pairs;  // (s, y)
    std::deque<double> rho;
    bool have_eval = false;  // f/g cache valid at the current params
    double f = 0.0;
    std::vector<double> g;

    explicit LbfgsState(std::size_t n, LbfgsConfig cfg = {});
    void clear_history();
};

struct LbfgsStepResult {
    double loss = 0.0;  // at the post-step parameters
    bool step_taken = false;
    int evals = 0;
    std::string note;
};

/// One quasi-Newton step: two-loop-recursion direction, line search, history
/// update (pairs violating s.y > 0 are skipped). On line-search failure the
/// parameters stay put, the history is cleared and the note reports it.
LbfgsStepResult lbfgs_step(LbfgsState& state, std::vector<double>& params,
                           const LossFn& fn);

}  // namespace qpinn
