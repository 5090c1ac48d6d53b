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

#include "qpinn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qpinn {
namespace {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline Vec3 sub_scaled(const Vec3& p, double t, const Vec3& u) {
    return {p[0] - t * u[0], p[1] - t * u[1], p[2] - t * u[2]};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Signed distance to one capped cylinder (origin -> length*axis).
double cylinder_sdf(const Vec3& p, const Pipe& pipe) {
    const double t = dot(p, pipe.axis);
    const double radial = norm(sub_scaled(p, t, pipe.axis));
    const double dr = radial - pipe.radius;
    const double dt = std::max(-t, t - pipe.length);
    if (dr <= 0.0 && dt <= 0.0) return std::max(dr, dt);
    return std::hypot(std::max(dr, 0.0), std::max(dt, 0.0));
}

struct EndCheck {
    const Pipe* pipe;
    PipeEnd end;
};

}  // namespace

void MixerSpec::validate() const {
    if (!(alpha_deg > 0.0 && alpha_deg < 90.0))
        throw std::invalid_argument(
            "MixerSpec: alpha must lie strictly between 0 and 90 degrees");
    if (!(radius > 0.0) || !(inlet_length > 0.0) || !(outlet_length > 0.0) ||
        !(grid_step > 0.0))
        throw std::invalid_argument(
            "MixerSpec: radius, lengths and grid_step must be positive");
    if (!(v_max >= 0.0) || !std::isfinite(p_out))
        throw std::invalid_argument("MixerSpec: bad boundary values");
}

const char* to_string(Region r) {
    switch (r) {
        case Region::Fluid: return "fluid";
        case Region::Wall: return "wall";
        case Region::Inlet: return "inlet";
        case Region::Outlet: return "outlet";
    }
    return "?";
}

Region region_from_string(const std::string& s) {
    if (s == "fluid") return Region::Fluid;
    if (s == "wall") return Region::Wall;
    if (s == "inlet") return Region::Inlet;
    if (s == "outlet") return Region::Outlet;
    throw std::invalid_argument("unknown region label: " + s);
}

std::size_t PointCloud::count(Region r) const {
    return static_cast<std::size_t>(std::count(region.begin(), region.end(), r));
}

std::vector<std::size_t> PointCloud::indices_of(Region r) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < region.size(); ++i)
        if (region[i] == r) out.push_back(i);
    return out;
}

MixerPipes mixer_pipes(const MixerSpec& spec) {
    spec.validate();
    const double a = spec.alpha_deg * std::numbers::pi / 180.0;
    const double c = std::cos(a), s = std::sin(a);
    MixerPipes mp;
    mp.right_inlet = {{c, s, 0.0}, spec.inlet_length, spec.radius};
    mp.left_inlet = {{-c, s, 0.0}, spec.inlet_length, spec.radius};
    mp.outlet = {{0.0, -1.0, 0.0}, spec.outlet_length, spec.radius};
    return mp;
}

double mixer_signed_distance(const MixerSpec& spec, const Vec3& p) {
    const MixerPipes mp = mixer_pipes(spec);
    return std::min({cylinder_sdf(p, mp.right_inlet),
                     cylinder_sdf(p, mp.left_inlet),
                     cylinder_sdf(p, mp.outlet)});
}

std::array<double, 3> inlet_profile(const Vec3& point, const PipeEnd& end,
                                    double v_max) {
    const Vec3 rel = {point[0] - end.center[0], point[1] - end.center[1],
                      point[2] - end.center[2]};
    const double t = dot(rel, end.into_fluid);
    const double d = norm(sub_scaled(rel, t, end.into_fluid));
    if (d > end.radius * (1.0 + 1e-12))
        throw std::invalid_argument("inlet_profile: point outside the disk");
    const double mag = v_max * (1.0 - (d / end.radius) * (d / end.radius));
    return {mag * end.into_fluid[0], mag * end.into_fluid[1],
            mag * end.into_fluid[2]};
}

PointCloud generate_mixer(const MixerSpec& spec) {
    spec.validate();
    const MixerPipes mp = mixer_pipes(spec);
    const Pipe* pipes[3] = {&mp.right_inlet, &mp.left_inlet, &mp.outlet};

    // inlet/outlet end disks, axes flipped to point into the fluid
    EndCheck ends[3];
    for (int i = 0; i < 3; ++i) {
        const Pipe& p = *pipes[i];
        ends[i].pipe = &p;
        ends[i].end.center = {p.axis[0] * p.length, p.axis[1] * p.length,
                              p.axis[2] * p.length};
        ends[i].end.into_fluid = {-p.axis[0], -p.axis[1], -p.axis[2]};
        ends[i].end.radius = p.radius;
    }

    // lattice bounds: pipe endpoints inflated by radius + one step
    Vec3 lo = {0, 0, 0}, hi = {0, 0, 0};
    for (const Pipe* p : pipes) {
        for (int c = 0; c < 3; ++c) {
            const double e = p->axis[c] * p->length;
            lo[c] = std::min(lo[c], std::min(0.0, e));
            hi[c] = std::max(hi[c], std::max(0.0, e));
        }
    }
    const double pad = spec.radius + spec.grid_step;
    for (int c = 0; c < 3; ++c) {
        lo[c] -= pad;
        hi[c] += pad;
    }

    const double h = spec.grid_step;
    const double shell = 0.5 * h;
    PointCloud cloud;
    const long i0 = static_cast<long>(std::ceil(lo[0] / h));
    const long i1 = static_cast<long>(std::floor(hi[0] / h));
    const long j0 = static_cast<long>(std::ceil(lo[1] / h));
    const long j1 = static_cast<long>(std::floor(hi[1] / h));
    const long k0 = static_cast<long>(std::ceil(lo[2] / h));
    const long k1 = static_cast<long>(std::floor(hi[2] / h));
    for (long k = k0; k <= k1; ++k) {
        for (long j = j0; j <= j1; ++j) {
            for (long i = i0; i <= i1; ++i) {
                const Vec3 p = {i * h, j * h, k * h};
                const double sdf = std::min({cylinder_sdf(p, mp.right_inlet),
                                             cylinder_sdf(p, mp.left_inlet),
                                             cylinder_sdf(p, mp.outlet)});
                if (sdf > 0.0) continue;

                Region reg = Region::Fluid;
                int end_hit = -1;
                for (int e = 0; e < 3; ++e) {
                    const Pipe& pipe = *ends[e].pipe;
                    const double t = dot(p, pipe.axis);
                    if (pipe.length - t > shell) continue;
                    const double radial = norm(sub_scaled(p, t, pipe.axis));
                    if (radial <= pipe.radius + 1e-12) {
                        end_hit = e;
                        break;
                    }
                }
                if (end_hit == 0 || end_hit == 1) {
                    reg = Region::Inlet;
                } else if (end_hit == 2) {
                    reg = Region::Outlet;
                } else if (-sdf <= shell) {
                    reg = Region::Wall;
                }

                cloud.points.push_back(p);
                cloud.region.push_back(reg);
                if (reg == Region::Inlet) {
                    cloud.bc_velocity.push_back(
                        inlet_profile(p, ends[end_hit].end, spec.v_max));
                } else {
                    cloud.bc_velocity.push_back({0.0, 0.0, 0.0});
                }
                cloud.bc_pressure.push_back(reg == Region::Outlet ? spec.p_out
                                                                  : 0.0);
            }
        }
    }

    if (cloud.count(Region::Fluid) == 0) {
        std::ostringstream msg;
        msg << "generate_mixer: grid_step " << h
            << " too coarse, no interior fluid points (pipe radius "
            << spec.radius << "); refine the grid";
        throw std::invalid_argument(msg.str());
    }
    return cloud;
}

// ---- CSV ------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, std::size_t line_no,
                    const char* what) {
    double v = 0.0;
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) {
        std::ostringstream msg;
        msg << "csv line " << line_no << ": bad " << what << " value '" << s
            << "'";
        throw std::runtime_error(msg.str());
    }
    return v;
}

[[noreturn]] void row_error(std::size_t line_no, const std::string& what) {
    std::ostringstream msg;
    msg << "csv line " << line_no << ": " << what;
    throw std::runtime_error(msg.str());
}

}  // namespace

void save_csv(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "x,y,z,region,vx,vy,vz,p\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& p = cloud.points[i];
        out << p[0] << ',' << p[1] << ',' << p[2] << ','
            << to_string(cloud.region[i]) << ',';
        if (cloud.region[i] == Region::Inlet) {
            const auto& v = cloud.bc_velocity[i];
            out << v[0] << ',' << v[1] << ',' << v[2] << ',';
        } else {
            out << ",,,";
        }
        if (cloud.region[i] == Region::Outlet) out << cloud.bc_pressure[i];
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

PointCloud load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("csv " + path + ": no points (empty file)");
    {
        const auto header = split_csv_line(line);
        const std::vector<std::string> want = {"x",  "y",  "z",  "region",
                                               "vx", "vy", "vz", "p"};
        if (std::vector<std::string>(header.begin(), header.end()) != want)
            throw std::runtime_error("csv " + path + ": bad header '" + line +
                                     "'");
    }

    PointCloud cloud;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 8) row_error(line_no, "expected 8 fields");
        const Region reg = region_from_string(f[3]);
        Vec3 p = {parse_double(f[0], line_no, "x"),
                  parse_double(f[1], line_no, "y"),
                  parse_double(f[2], line_no, "z")};
        Vec3 v = {0, 0, 0};
        double pressure = 0.0;
        const bool has_v = !f[4].empty() || !f[5].empty() || !f[6].empty();
        const bool has_p = !f[7].empty();
        if (reg == Region::Inlet) {
            if (f[4].empty() || f[5].empty() || f[6].empty())
                row_error(line_no, "inlet row missing velocity components");
            v = {parse_double(f[4], line_no, "vx"),
                 parse_double(f[5], line_no, "vy"),
                 parse_double(f[6], line_no, "vz")};
            if (has_p) row_error(line_no, "inlet row must not carry pressure");
        } else if (reg == Region::Outlet) {
            if (!has_p) row_error(line_no, "outlet row missing pressure");
            if (has_v) row_error(line_no, "outlet row must not carry velocity");
            pressure = parse_double(f[7], line_no, "p");
        } else if (has_v || has_p) {
            row_error(line_no, "fluid/wall rows must not carry BC values");
        }
        cloud.points.push_back(p);
        cloud.region.push_back(reg);
        cloud.bc_velocity.push_back(v);
        cloud.bc_pressure.push_back(pressure);
    }
    if (cloud.size() == 0)
        throw std::runtime_error("csv " + path + ": no points");
    return cloud;
}

}  // namespace qpinn
