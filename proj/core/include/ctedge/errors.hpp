#pragma once

#include <stdexcept>
#include <string>

namespace ctedge {

// Invalid user-supplied configuration (bad key, out-of-range value, ...).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Operation invoked on data that violates its stated requirements
// (patch too small, degenerate matrix, non-positive scale, ...).
class PreconditionError : public std::runtime_error {
public:
    explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical routine failed to meet its own consistency requirements.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or unreadable data file.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ctedge
