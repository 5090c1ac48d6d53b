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
 * Training protocols: full-batch classical training (Adam then L-BFGS, one
 * optimizer step per epoch), transfer learning across mixer angles, hybrid
 * mini-batch training, and run comparison.
 *
 * Run directory layout (when an output directory is set):
 *   config            JSON echo of the resolved configuration
 *   loss.csv          epoch 0 (initial) plus one row per epoch
 *   checkpoint_0      parameters at initialization
 *   checkpoint_<E>    parameters after the last completed epoch
 *   report            plain-text summary
 */

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpinn/geometry.hpp"
#include "qpinn/network.hpp"
#include "qpinn/optim.hpp"
#include "qpinn/physics.hpp"

namespace qpinn {

struct TrainConfig {
    Variant variant = Variant::Classical;
    int adam_epochs = 1000;
    int lbfgs_epochs = 100;
    int batch_size = 0;  // 0 = full batch; > 0 = mini-batch (Adam phase)
    std::uint64_t seed = 0;
    MixerSpec geometry;
    std::string cloud_csv;  // when set, wins over `geometry`
    FluidParams fluid;
    LossWeights weights;
    AdamConfig adam;
    LbfgsConfig lbfgs;
    bool deterministic = false;  // single-threaded, fixed reduction order
    int threads = 0;             // 0 = QPINN_THREADS env or hardware count
    std::string init_checkpoint;
    std::string out_dir;  // empty = keep results in memory only
};

/// Strict JSON round trip for TrainConfig: unknown keys are rejected;
/// `overrides` are dotted key=value pairs that win over file values.
TrainConfig parse_config_text(const std::string& json_text,
                              std::span<const std::string> overrides = {});
TrainConfig load_config_file(const std::string& path,
                             std::span<const std::string> overrides = {});
std::string config_to_json_text(const TrainConfig& cfg);

struct RunReport {
    LossBreakdown initial;
    std::vector<LossBreakdown> history;  // one entry per completed epoch
    std::string checkpoint_path;         // empty when out_dir was empty
    double wall_seconds = 0.0;
    bool diverged = false;
    long diverged_epoch = -1;  // epoch whose update produced non-finite loss
    TrainConfig config;
    ModelParams final_params;

    double final_total() const {
        return history.empty() ? initial.total : history.back().total;
    }
};

/// Thrown when training never produced a finite loss to preserve.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Full-batch (or mini-batch when batch_size > 0) training of the
/// configured variant: adam_epochs Adam steps, then lbfgs_epochs full-batch
/// L-BFGS steps. On divergence the last finite parameters are preserved and
/// the report says where training stopped.
RunReport train_classical(const TrainConfig& config);

/// Chained transfer learning: for each angle, regenerate the mixer, start
/// from the previous step's parameters and run `epochs_per_step` L-BFGS
/// epochs. The base checkpoint must match the configured architecture
/// (rejected before any training otherwise).
std::vector<RunReport> transfer_learn(const std::string& base_checkpoint,
                                      std::span<const double> alphas,
                                      int epochs_per_step,
                                      const TrainConfig& base_config);

/// Hybrid training: trunk layers come from a pretrained classical
/// checkpoint, circuit angles and head are seeded fresh; all parameters
/// train jointly with mini-batch Adam (batches drawn without replacement
/// from a seeded shuffle each epoch).
RunReport train_hybrid(const TrainConfig& config,
                       const std::string& pretrained_trunk);

struct ComparisonReport {
    double final_a = 0.0, final_b = 0.0;
    double relative_diff = 0.0;  // (final_a - final_b) / final_a
    bool truncated_a = false, truncated_b = false;  // non-finite tail dropped
    std::size_t epochs_a = 0, epochs_b = 0;         // finite epochs compared
    // aligned curves: epoch, total_a, total_b (up to the shorter history)
    std::vector<std::array<double, 3>> aligned;
};

/// Aligns two runs' loss curves and reports the relative final-loss
/// difference. Histories with a non-finite tail are cut at the last finite
/// epoch and flagged.
ComparisonReport compare(const RunReport& a, const RunReport& b);

/// Same, from loss.csv files of two run directories.
ComparisonReport compare_loss_csv(const std::string& csv_a,
                                  const std::string& csv_b);

std::string comparison_to_text(const ComparisonReport& rep);

/// loss.csv helpers shared by the trainer, the CLI and the tests.
void write_loss_csv(const std::string& path, const LossBreakdown& initial,
                    std::span<const LossBreakdown> history);
std::vector<LossBreakdown> load_loss_csv(const std::string& path);

/// Thread-count resolution: explicit > 0 wins, else QPINN_THREADS, else the
/// hardware count; deterministic mode pins it to 1.
int resolve_threads(const TrainConfig& cfg);

}  // namespace qpinn
