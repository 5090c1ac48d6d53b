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

#include "qpinn/fieldio.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace qpinn {

FieldSnapshot infer(const ModelParams& mp, const PointCloud& cloud) {
    FieldSnapshot snap;
    snap.points = cloud.points;
    snap.velocity.reserve(cloud.size());
    snap.pressure.reserve(cloud.size());
    snap.finite.reserve(cloud.size());
    for (const auto& p : cloud.points) {
        const Prediction<double> pred = forward_fields<double>(mp, p);
        snap.velocity.push_back(pred.velocity);
        snap.pressure.push_back(pred.pressure);
        const bool ok = std::isfinite(pred.velocity[0]) &&
                        std::isfinite(pred.velocity[1]) &&
                        std::isfinite(pred.velocity[2]) &&
                        std::isfinite(pred.pressure);
        snap.finite.push_back(ok ? 1 : 0);
    }
    return snap;
}

void write_vtk(const FieldSnapshot& snap, const std::string& path,
               const std::string& title) {
    if (snap.velocity.size() != snap.points.size() ||
        snap.pressure.size() != snap.points.size())
        throw std::invalid_argument("write_vtk: misaligned snapshot fields");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    const std::size_t n = snap.size();
    out << "# vtk DataFile Version 3.0\n";
    out << title << "\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << std::setprecision(17);
    out << "POINTS " << n << " double\n";
    for (const auto& p : snap.points)
        out << p[0] << ' ' << p[1] << ' ' << p[2] << "\n";
    out << "CELLS " << n << ' ' << 2 * n << "\n";
    for (std::size_t i = 0; i < n; ++i) out << "1 " << i << "\n";
    out << "CELL_TYPES " << n << "\n";
    for (std::size_t i = 0; i < n; ++i) out << "1\n";  // VTK_VERTEX
    out << "POINT_DATA " << n << "\n";
    out << "VECTORS velocity double\n";
    for (const auto& v : snap.velocity)
        out << v[0] << ' ' << v[1] << ' ' << v[2] << "\n";
    out << "SCALARS pressure double 1\n";
    out << "LOOKUP_TABLE default\n";
    for (double p : snap.pressure) out << p << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace qpinn
