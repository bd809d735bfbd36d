#ifndef CPN_IO_PLY_HPP
#define CPN_IO_PLY_HPP

#include <array>
#include <string>

#include "cpn/io/types.hpp"

namespace cpn::io {

/// Viridis-style color ramp; t in [0,1] is clamped, returns RGB in [0,1].
std::array<double, 3> viridis(double t);

/// Writes ASCII PLY with per-vertex uchar RGB taken from the viridis ramp
/// over the z (depth) axis: min depth maps to ramp start, max to ramp end.
/// A cloud with zero depth spread maps every point to ramp(0.5).
void write_ply_depth_colored(const PointCloud& cloud, const std::string& path);

std::string format_ply_depth_colored(const PointCloud& cloud);

/// Minimal ASCII PLY vertex reader (x y z [colors ignored]); used for
/// round-trip checks and diagnostics, not a general PLY importer.
PointCloud read_ply_ascii(const std::string& path);

} // namespace cpn::io

#endif
