#ifndef CPN_CORE_ERRORS_HPP
#define CPN_CORE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cpn {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem / stream failures. CLI maps these to exit code 2.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

/// Bad inputs, bad configs, malformed files. CLI maps these to exit code 1.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

} // namespace cpn

#endif
