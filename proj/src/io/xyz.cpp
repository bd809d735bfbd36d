#include "cpn/io/xyz.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace cpn::io {

PointCloud parse_xyz(std::string_view text) {
    AlignedDoubles coords;
    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        ++line_no;
        pos = eol + 1;

        // tokenize
        double vals[3];
        int nvals = 0;
        size_t i = 0;
        bool bad = false;
        while (i < line.size()) {
            while (i < line.size() &&
                   std::isspace(static_cast<unsigned char>(line[i])))
                ++i;
            if (i >= line.size()) break;
            size_t start = i;
            while (i < line.size() &&
                   !std::isspace(static_cast<unsigned char>(line[i])))
                ++i;
            if (nvals >= 3) {
                bad = true;
                break;
            }
            double v = 0.0;
            auto [p, ec] =
                std::from_chars(line.data() + start, line.data() + i, v);
            if (ec != std::errc{} || p != line.data() + i || !std::isfinite(v)) {
                bad = true;
                break;
            }
            vals[nvals++] = v;
        }
        if (bad || (nvals != 0 && nvals != 3))
            throw MalformedLine("XYZ: expected three numbers", line_no);
        if (nvals == 3) {
            coords.push_back(vals[0]);
            coords.push_back(vals[1]);
            coords.push_back(vals[2]);
        }
        if (eol == text.size()) break;
    }
    if (coords.empty())
        throw DegenerateCloud("XYZ: no points in input");

    PointCloud cloud;
    cloud.points = Matrix(static_cast<int>(coords.size() / 3), 3);
    cloud.points.data = std::move(coords);
    return cloud;
}

PointCloud read_xyz(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_xyz(ss.str());
}

std::string format_xyz(const PointCloud& cloud) {
    std::string out;
    out.reserve(static_cast<size_t>(cloud.size()) * 48);
    char buf[96];
    for (int i = 0; i < cloud.points.rows; ++i) {
        std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g\n", cloud.points(i, 0),
                      cloud.points(i, 1), cloud.points(i, 2));
        out += buf;
    }
    return out;
}

void write_xyz(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out << format_xyz(cloud);
    if (!out)
        throw IoError("write failed: " + path);
}

} // namespace cpn::io
