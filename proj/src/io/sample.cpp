#include "cpn/io/sample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cpn/core/rng.hpp"

namespace cpn::io {
namespace {

double triangle_area(const std::array<double, 3>& a, const std::array<double, 3>& b,
                     const std::array<double, 3>& c) {
    const double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
    const double vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
    const double cx = uy * vz - uz * vy;
    const double cy = uz * vx - ux * vz;
    const double cz = ux * vy - uy * vx;
    return 0.5 * std::sqrt(cx * cx + cy * cy + cz * cz);
}

} // namespace

PointCloud sample_surface(const TriangleMesh& mesh, int n, uint64_t seed) {
    if (n < 1)
        throw ValidationError("sample_surface: n must be >= 1");
    if (mesh.faces.empty())
        throw ZeroAreaMesh("sample_surface: mesh has no faces");

    std::vector<double> cumulative(mesh.faces.size());
    double total = 0.0;
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& face = mesh.faces[f];
        total += triangle_area(mesh.vertices[static_cast<size_t>(face[0])],
                               mesh.vertices[static_cast<size_t>(face[1])],
                               mesh.vertices[static_cast<size_t>(face[2])]);
        cumulative[f] = total;
    }
    if (!(total > 0.0))
        throw ZeroAreaMesh("sample_surface: total surface area is zero");

    Rng rng(seed);
    PointCloud cloud;
    cloud.points = Matrix(n, 3);
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform() * total;
        const size_t f = static_cast<size_t>(
            std::lower_bound(cumulative.begin(), cumulative.end(), u) -
            cumulative.begin());
        const auto& face = mesh.faces[std::min(f, mesh.faces.size() - 1)];
        const auto& a = mesh.vertices[static_cast<size_t>(face[0])];
        const auto& b = mesh.vertices[static_cast<size_t>(face[1])];
        const auto& c = mesh.vertices[static_cast<size_t>(face[2])];
        // Uniform barycentric sample via the sqrt trick.
        const double r1 = std::sqrt(rng.uniform());
        const double r2 = rng.uniform();
        const double wa = 1.0 - r1, wb = r1 * (1.0 - r2), wc = r1 * r2;
        for (int d = 0; d < 3; ++d)
            cloud.points(i, d) = wa * a[d] + wb * b[d] + wc * c[d];
    }
    return cloud;
}

PointCloud normalize_unit_sphere(const PointCloud& cloud) {
    const int n = cloud.points.rows;
    if (n < 1)
        throw DegenerateCloud("normalize: empty cloud");
    double cx = 0.0, cy = 0.0, cz = 0.0;
    for (int i = 0; i < n; ++i) {
        cx += cloud.points(i, 0);
        cy += cloud.points(i, 1);
        cz += cloud.points(i, 2);
    }
    cx /= n;
    cy /= n;
    cz /= n;
    double max_dist = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dx = cloud.points(i, 0) - cx;
        const double dy = cloud.points(i, 1) - cy;
        const double dz = cloud.points(i, 2) - cz;
        max_dist = std::max(max_dist, std::sqrt(dx * dx + dy * dy + dz * dz));
    }
    if (!(max_dist > 0.0))
        throw DegenerateCloud("normalize: all points coincide");

    PointCloud out = cloud;
    for (int i = 0; i < n; ++i) {
        out.points(i, 0) = (cloud.points(i, 0) - cx) / max_dist;
        out.points(i, 1) = (cloud.points(i, 1) - cy) / max_dist;
        out.points(i, 2) = (cloud.points(i, 2) - cz) / max_dist;
    }
    return out;
}

PointCloud augment(const PointCloud& cloud, const AugmentConfig& cfg, uint64_t seed) {
    if (!(cfg.scale_min > 0.0) || cfg.scale_max < cfg.scale_min)
        throw ValidationError("augment: scale range must be positive");

    Rng rng(seed);
    const double s = rng.uniform(cfg.scale_min, cfg.scale_max);
    const double theta = rng.uniform(cfg.rot_min, cfg.rot_max);
    const double tx = rng.uniform(cfg.shift_min, cfg.shift_max);
    const double ty = rng.uniform(cfg.shift_min, cfg.shift_max);
    const double tz = rng.uniform(cfg.shift_min, cfg.shift_max);
    const double c = std::cos(theta), sn = std::sin(theta);

    PointCloud out = cloud;
    for (int i = 0; i < cloud.points.rows; ++i) {
        const double x = s * cloud.points(i, 0);
        const double y = s * cloud.points(i, 1);
        const double z = s * cloud.points(i, 2);
        // rotation about y
        out.points(i, 0) = c * x + sn * z + tx;
        out.points(i, 1) = y + ty;
        out.points(i, 2) = -sn * x + c * z + tz;
    }
    return out;
}

} // namespace cpn::io
