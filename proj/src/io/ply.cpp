#include "cpn/io/ply.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cpn::io {
namespace {

// Control points of the matplotlib viridis map, linearly interpolated.
constexpr double kViridis[][3] = {
    {0.267004, 0.004874, 0.329415}, {0.282623, 0.140926, 0.457517},
    {0.253935, 0.265254, 0.529983}, {0.206756, 0.371758, 0.553117},
    {0.163625, 0.471133, 0.558148}, {0.127568, 0.566949, 0.550556},
    {0.134692, 0.658636, 0.517649}, {0.266941, 0.748751, 0.440573},
    {0.477504, 0.821444, 0.318195}, {0.741388, 0.873449, 0.149561},
    {0.993248, 0.906157, 0.143936}};
constexpr int kStops = static_cast<int>(std::size(kViridis));

} // namespace

std::array<double, 3> viridis(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const double x = t * (kStops - 1);
    const int i = std::min(kStops - 2, static_cast<int>(x));
    const double f = x - i;
    return {kViridis[i][0] + f * (kViridis[i + 1][0] - kViridis[i][0]),
            kViridis[i][1] + f * (kViridis[i + 1][1] - kViridis[i][1]),
            kViridis[i][2] + f * (kViridis[i + 1][2] - kViridis[i][2])};
}

std::string format_ply_depth_colored(const PointCloud& cloud) {
    if (cloud.size() < 1)
        throw DegenerateCloud("PLY: empty cloud");
    const int n = cloud.points.rows;
    double zmin = cloud.points(0, 2), zmax = zmin;
    for (int i = 1; i < n; ++i) {
        zmin = std::min(zmin, cloud.points(i, 2));
        zmax = std::max(zmax, cloud.points(i, 2));
    }
    const double span = zmax - zmin;

    std::string out;
    out += "ply\nformat ascii 1.0\ncomment depth-colored point cloud\n";
    out += "element vertex " + std::to_string(n) + "\n";
    out += "property float x\nproperty float y\nproperty float z\n";
    out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out += "end_header\n";

    char buf[128];
    for (int i = 0; i < n; ++i) {
        const double t =
            span > 0.0 ? (cloud.points(i, 2) - zmin) / span : 0.5;
        const auto rgb = viridis(t);
        std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %d %d %d\n",
                      cloud.points(i, 0), cloud.points(i, 1), cloud.points(i, 2),
                      static_cast<int>(std::lround(rgb[0] * 255.0)),
                      static_cast<int>(std::lround(rgb[1] * 255.0)),
                      static_cast<int>(std::lround(rgb[2] * 255.0)));
        out += buf;
    }
    return out;
}

void write_ply_depth_colored(const PointCloud& cloud, const std::string& path) {
    const std::string body = format_ply_depth_colored(cloud);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out << body;
    if (!out)
        throw IoError("write failed: " + path);
}

PointCloud read_ply_ascii(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    std::string line;
    int n = -1;
    bool in_header = true;
    if (!std::getline(in, line) || line != "ply")
        throw MalformedLine("PLY: missing magic", 1);
    int line_no = 1;
    while (in_header && std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string word;
        ss >> word;
        if (word == "element") {
            std::string what;
            ss >> what >> n;
            if (what != "vertex")
                throw MalformedLine("PLY: only vertex elements supported", line_no);
        } else if (word == "end_header") {
            in_header = false;
        }
    }
    if (n < 1)
        throw MalformedLine("PLY: no vertex count", line_no);

    PointCloud cloud;
    cloud.points = Matrix(n, 3);
    for (int i = 0; i < n; ++i) {
        ++line_no;
        if (!std::getline(in, line))
            throw MalformedLine("PLY: truncated vertex list", line_no);
        std::istringstream ss(line);
        if (!(ss >> cloud.points(i, 0) >> cloud.points(i, 1) >> cloud.points(i, 2)))
            throw MalformedLine("PLY: bad vertex", line_no);
    }
    return cloud;
}

} // namespace cpn::io
