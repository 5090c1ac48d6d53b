/// Minimal strict reader for the legacy-ASCII VTK subset this project
/// writes: POINTS + VERTEX cells + POINT_DATA with a `velocity` vector
/// field and a `pressure` scalar field. Deliberately picky about the file
/// structure so format drift fails loudly; this is the reference parser
/// the export round-trip criterion uses.

#pragma once

#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpinn::test {

struct VtkPointData {
    std::vector<std::array<double, 3>> points;
    std::vector<std::array<double, 3>> velocity;
    std::vector<double> pressure;
};

inline VtkPointData read_legacy_vtk(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("vtk reader: cannot open " + path);
    auto fail = [&](const std::string& what) -> void {
        throw std::runtime_error("vtk reader: " + what + " in " + path);
    };

    std::string line;
    if (!std::getline(in, line) || line.rfind("# vtk DataFile Version", 0) != 0)
        fail("missing version header");
    if (!std::getline(in, line)) fail("missing title");
    if (!std::getline(in, line) || line != "ASCII") fail("expected ASCII");
    if (!std::getline(in, line) || line != "DATASET UNSTRUCTURED_GRID")
        fail("expected DATASET UNSTRUCTURED_GRID");

    VtkPointData out;
    std::size_t n = 0;
    {
        std::string kw, type;
        if (!(in >> kw >> n >> type) || kw != "POINTS" || type != "double")
            fail("bad POINTS header");
        out.points.resize(n);
        for (auto& p : out.points)
            if (!(in >> p[0] >> p[1] >> p[2])) fail("truncated POINTS");
    }
    {
        std::string kw;
        std::size_t cells = 0, ints = 0;
        if (!(in >> kw >> cells >> ints) || kw != "CELLS" || cells != n ||
            ints != 2 * n)
            fail("bad CELLS header");
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t sz = 0, id = 0;
            if (!(in >> sz >> id) || sz != 1 || id != i) fail("bad vertex cell");
        }
        std::size_t types = 0;
        if (!(in >> kw >> types) || kw != "CELL_TYPES" || types != n)
            fail("bad CELL_TYPES header");
        for (std::size_t i = 0; i < n; ++i) {
            int t = 0;
            if (!(in >> t) || t != 1) fail("expected VTK_VERTEX cells");
        }
    }
    {
        std::string kw;
        std::size_t m = 0;
        if (!(in >> kw >> m) || kw != "POINT_DATA" || m != n)
            fail("bad POINT_DATA header");
        std::string name, type;
        if (!(in >> kw >> name >> type) || kw != "VECTORS" ||
            name != "velocity" || type != "double")
            fail("bad VECTORS header");
        out.velocity.resize(n);
        for (auto& v : out.velocity)
            if (!(in >> v[0] >> v[1] >> v[2])) fail("truncated velocity");
        int comps = 0;
        if (!(in >> kw >> name >> type >> comps) || kw != "SCALARS" ||
            name != "pressure" || type != "double" || comps != 1)
            fail("bad SCALARS header");
        std::string lut, lut_name;
        if (!(in >> lut >> lut_name) || lut != "LOOKUP_TABLE" ||
            lut_name != "default")
            fail("bad LOOKUP_TABLE");
        out.pressure.resize(n);
        for (double& p : out.pressure)
            if (!(in >> p)) fail("truncated pressure");
    }
    return out;
}

}  // namespace qpinn::test
