#ifndef CPN_IO_SAMPLE_HPP
#define CPN_IO_SAMPLE_HPP

#include <cstdint>

#include "cpn/io/types.hpp"

namespace cpn::io {

/// Uniform surface sampling: triangles chosen by area weight, then uniform
/// barycentric coordinates. Deterministic per seed. Throws ZeroAreaMesh.
PointCloud sample_surface(const TriangleMesh& mesh, int n, uint64_t seed);

/// Centers the cloud at its centroid and scales so the farthest point has
/// norm 1. Throws DegenerateCloud when every point coincides.
PointCloud normalize_unit_sphere(const PointCloud& cloud);

struct AugmentConfig {
    double scale_min = 0.8;
    double scale_max = 1.25;
    double rot_min = 0.0;              // rotation about the up (y) axis
    double rot_max = 6.283185307179586;
    double shift_min = -0.1;           // per-axis translation
    double shift_max = 0.1;

    static AugmentConfig identity() {
        return {1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
    }
};

/// Random uniform scale, y-axis rotation and per-axis shift, in that order.
/// Identity ranges reproduce the input exactly.
PointCloud augment(const PointCloud& cloud, const AugmentConfig& cfg, uint64_t seed);

} // namespace cpn::io

#endif
