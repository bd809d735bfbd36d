#include "cpn/io/off.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cpn::io {
namespace {

// Token scanner over the raw byte buffer, keeping the current offset for
// error reporting. '#' starts a comment running to end of line.
class Scanner {
public:
    explicit Scanner(std::string_view buf) : buf_(buf) {}

    size_t offset() const { return pos_; }

    bool skip_space() {
        while (pos_ < buf_.size()) {
            const char c = buf_[pos_];
            if (c == '#') {
                while (pos_ < buf_.size() && buf_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
        return pos_ < buf_.size();
    }

    std::string_view token() {
        if (!skip_space()) return {};
        const size_t start = pos_;
        while (pos_ < buf_.size() && !std::isspace(static_cast<unsigned char>(buf_[pos_])) &&
               buf_[pos_] != '#')
            ++pos_;
        return buf_.substr(start, pos_ - start);
    }

    long next_int(const char* what) {
        const size_t at = pos_;
        const std::string_view t = token();
        if (t.empty())
            throw TruncatedFile(std::string("OFF: missing ") + what, at);
        long v = 0;
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || p != t.data() + t.size())
            throw MalformedHeader(std::string("OFF: bad integer for ") + what, at);
        return v;
    }

    double next_real(const char* what) {
        const size_t at = pos_;
        const std::string_view t = token();
        if (t.empty())
            throw TruncatedFile(std::string("OFF: missing ") + what, at);
        double v = 0.0;
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || p != t.data() + t.size() || !std::isfinite(v))
            throw MalformedHeader(std::string("OFF: bad number for ") + what, at);
        return v;
    }

private:
    std::string_view buf_;
    size_t pos_ = 0;
};

constexpr long kMaxCount = 100'000'000;

} // namespace

TriangleMesh parse_off(std::string_view bytes) {
    Scanner sc(bytes);
    if (!sc.skip_space())
        throw MalformedHeader("OFF: empty input", 0);

    const size_t header_at = sc.offset();
    std::string_view first = sc.token();
    if (first.size() < 3 || first.substr(0, 3) != "OFF")
        throw MalformedHeader("OFF: missing OFF keyword", header_at);

    long nv = 0, nf = 0;
    if (first.size() > 3) {
        // Fused header: counts start right after "OFF" with no whitespace.
        std::string_view rest = first.substr(3);
        auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), nv);
        if (ec != std::errc{})
            throw MalformedHeader("OFF: bad vertex count in fused header", header_at + 3);
        if (p != rest.data() + rest.size())
            throw MalformedHeader("OFF: trailing junk in fused header", header_at + 3);
        nf = sc.next_int("face count");
        sc.next_int("edge count");
    } else {
        nv = sc.next_int("vertex count");
        nf = sc.next_int("face count");
        sc.next_int("edge count");
    }
    if (nv < 0 || nf < 0 || nv > kMaxCount || nf > kMaxCount)
        throw MalformedHeader("OFF: counts out of range", header_at);

    TriangleMesh mesh;
    mesh.vertices.reserve(static_cast<size_t>(nv));
    for (long i = 0; i < nv; ++i) {
        const double x = sc.next_real("vertex x");
        const double y = sc.next_real("vertex y");
        const double z = sc.next_real("vertex z");
        mesh.vertices.push_back({x, y, z});
    }

    for (long f = 0; f < nf; ++f) {
        const size_t at = sc.offset();
        const long arity = sc.next_int("face vertex count");
        if (arity < 3 || arity > nv)
            throw MalformedHeader("OFF: face arity out of range", at);
        std::vector<int> poly(static_cast<size_t>(arity));
        for (long i = 0; i < arity; ++i) {
            const size_t idx_at = sc.offset();
            const long v = sc.next_int("face vertex index");
            if (v < 0 || v >= nv)
                throw IndexOutOfRange("OFF: face vertex index out of range", idx_at);
            poly[static_cast<size_t>(i)] = static_cast<int>(v);
        }
        // Fan triangulation from vertex 0 of the polygon.
        for (long i = 1; i + 1 < arity; ++i)
            mesh.faces.push_back({poly[0], poly[static_cast<size_t>(i)],
                                  poly[static_cast<size_t>(i) + 1]});
    }
    return mesh;
}

TriangleMesh read_off(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_off(ss.str());
}

} // namespace cpn::io
