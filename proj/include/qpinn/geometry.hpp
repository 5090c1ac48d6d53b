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
 * Y-mixer geometry on a static grid.
 *
 * The mixer is the union of three capped cylinders meeting at the origin:
 * two inlet pipes rising at +-alpha from the x axis and a vertical outlet
 * pipe pointing down. A regular lattice of pitch grid_step is intersected
 * with the solid; lattice points are tagged Fluid (interior), Wall (within
 * grid_step/2 of the union boundary), Inlet (within grid_step/2 of an inlet
 * end disk) or Outlet (outlet end disk). Inlet points carry a parabolic
 * velocity profile along the pipe axis into the fluid; outlet points carry
 * the fixed pressure.
 */

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace qpinn {

struct MixerSpec {
    double alpha_deg = 30.0;   // angle between the right inlet pipe and x axis
    double radius = 0.5;       // all three pipes
    double inlet_length = 2.0;
    double outlet_length = 2.0;
    double grid_step = 0.1;
    double v_max = 1.0;        // peak of the parabolic inlet profile
    double p_out = 0.0;

    void validate() const;  // alpha in (0, 90), all lengths positive
};

enum class Region : std::uint8_t { Fluid, Wall, Inlet, Outlet };

const char* to_string(Region r);
Region region_from_string(const std::string& s);

/// Tagged static-grid point cloud. bc_velocity rows are meaningful only for
/// Inlet points, bc_pressure only for Outlet points.
struct PointCloud {
    std::vector<std::array<double, 3>> points;
    std::vector<Region> region;
    std::vector<std::array<double, 3>> bc_velocity;
    std::vector<double> bc_pressure;

    std::size_t size() const { return points.size(); }
    std::size_t count(Region r) const;
    std::vector<std::size_t> indices_of(Region r) const;
};

/// Capped cylinder from the junction (origin) outward.
struct Pipe {
    std::array<double, 3> axis;  // unit vector, junction -> end disk
    double length = 0.0;
    double radius = 0.0;
};

struct MixerPipes {
    Pipe right_inlet, left_inlet, outlet;
};

MixerPipes mixer_pipes(const MixerSpec& spec);

/// Signed distance to the mixer solid (negative inside). min over the three
/// capped-cylinder SDFs, which is exact enough for shell classification.
double mixer_signed_distance(const MixerSpec& spec,
                             const std::array<double, 3>& p);

/// One end disk of a pipe, with the axis oriented into the fluid.
struct PipeEnd {
    std::array<double, 3> center;
    std::array<double, 3> into_fluid;
    double radius = 0.0;
};

/// v_max * (1 - (d/R)^2) along the axis into the fluid, d = distance from
/// the pipe centerline. Rejects points outside the disk radius.
std::array<double, 3> inlet_profile(const std::array<double, 3>& point,
                                    const PipeEnd& end, double v_max);

/// Deterministic for a fixed spec. Throws if the grid is too coarse to
/// produce any fluid point.
PointCloud generate_mixer(const MixerSpec& spec);

/// CSV schema (header required): x,y,z,region,vx,vy,vz,p with region one of
/// fluid/wall/inlet/outlet; vx,vy,vz filled only for inlet rows, p only for
/// outlet rows. Full-precision decimals, so save/load round-trips exactly.
void save_csv(const PointCloud& cloud, const std::string& path);
PointCloud load_csv(const std::string& path);

}  // namespace qpinn
