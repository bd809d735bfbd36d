#ifndef CPN_IO_OFF_HPP
#define CPN_IO_OFF_HPP

#include <string_view>

#include "cpn/io/types.hpp"

namespace cpn::io {

/// Parses an ASCII OFF mesh. Polygon faces with more than three vertices are
/// fan-triangulated from their first vertex. Accepts the ModelNet quirk where
/// the counts line is fused onto the "OFF" keyword ("OFF490 518 0").
///
/// Throws MalformedHeader, IndexOutOfRange or TruncatedFile; each carries the
/// byte offset of the failure.
TriangleMesh parse_off(std::string_view bytes);

TriangleMesh read_off(const std::string& path);

} // namespace cpn::io

#endif
