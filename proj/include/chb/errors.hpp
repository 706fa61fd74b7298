#pragma once

#include <stdexcept>
#include <string>

namespace chb {

/// Base class for all chb errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration: bad grid extents, non-positive coefficients,
/// unknown config keys, malformed values. CLI exit code 2.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// A coordinate or probe landed outside the domain.
class RangeError : public Error {
public:
    explicit RangeError(const std::string& msg) : Error(msg) {}
};

/// Interface diagnostics could not be evaluated (no crossing, vanishing
/// gradient, ...).
class DiagnosticError : public Error {
public:
    explicit DiagnosticError(const std::string& msg) : Error(msg) {}
};

/// File I/O failure. CLI exit code 4.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

} // namespace chb
