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
 * Field snapshots and legacy-ASCII VTK export for external visualizers.
 */

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qpinn/geometry.hpp"
#include "qpinn/network.hpp"

namespace qpinn {

struct FieldSnapshot {
    std::vector<std::array<double, 3>> points;
    std::vector<std::array<double, 3>> velocity;
    std::vector<double> pressure;
    std::vector<std::uint8_t> finite;  // per-point validity flag

    std::size_t size() const { return points.size(); }
};

/// Pure value-mode evaluation of the model over the cloud; deterministic,
/// no derivative payloads involved.
FieldSnapshot infer(const ModelParams& mp, const PointCloud& cloud);

/// Legacy ASCII VTK (DataFile Version 3.0): POINTS, one VERTEX cell per
/// point, then POINT_DATA with a `velocity` vector field and a `pressure`
/// scalar field. Values are printed with 17 significant digits, so a parse
/// reproduces them bit-exactly.
void write_vtk(const FieldSnapshot& snap, const std::string& path,
               const std::string& title = "qpinn field snapshot");

}  // namespace qpinn
