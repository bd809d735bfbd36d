#ifndef CPN_IO_TYPES_HPP
#define CPN_IO_TYPES_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cpn/core/errors.hpp"
#include "cpn/core/matrix.hpp"

namespace cpn::io {

struct TriangleMesh {
    std::vector<std::array<double, 3>> vertices;
    std::vector<std::array<int, 3>> faces;
};

struct PointCloud {
    Matrix points;                 // n x 3
    std::optional<Matrix> colors;  // n x 3 in [0,1] when present
    std::optional<int> label;

    int size() const { return points.rows; }
};

/// Parse failure with the byte offset where it was detected.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& msg, size_t byte_offset)
        : ValidationError(msg + " (byte " + std::to_string(byte_offset) + ")"),
          byte_offset(byte_offset) {}
    size_t byte_offset;
};

class MalformedHeader : public ParseError {
public:
    using ParseError::ParseError;
};

class IndexOutOfRange : public ParseError {
public:
    using ParseError::ParseError;
};

class TruncatedFile : public ParseError {
public:
    using ParseError::ParseError;
};

class MalformedLine : public ValidationError {
public:
    MalformedLine(const std::string& msg, int line_number)
        : ValidationError(msg + " (line " + std::to_string(line_number) + ")"),
          line_number(line_number) {}
    int line_number;
};

class ZeroAreaMesh : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DegenerateCloud : public ValidationError {
public:
    using ValidationError::ValidationError;
};

} // namespace cpn::io

#endif
