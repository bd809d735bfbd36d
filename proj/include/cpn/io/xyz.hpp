#ifndef CPN_IO_XYZ_HPP
#define CPN_IO_XYZ_HPP

#include <string>
#include <string_view>

#include "cpn/io/types.hpp"

namespace cpn::io {

/// Parses "x y z" per line, whitespace separated. Blank lines are skipped.
/// Throws MalformedLine (with 1-based line number) on wrong arity or bad
/// numbers, DegenerateCloud when the input holds no points.
PointCloud parse_xyz(std::string_view text);

PointCloud read_xyz(const std::string& path);

/// Writes one "x y z" line per point at 9 significant digits.
void write_xyz(const PointCloud& cloud, const std::string& path);

std::string format_xyz(const PointCloud& cloud);

} // namespace cpn::io

#endif
