/**
 * @file errors.hpp
 * @brief Exception hierarchy. The CLI maps these onto process exit codes.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace cephforge {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file (bad JSON, missing field, wrong type). Exit code 3.
struct ParseError : Error {
    using Error::Error;
};

/// Structurally valid input that violates a declared invariant. Exit code 1.
struct ValidationError : Error {
    using Error::Error;
};

/// Filesystem trouble: unreadable directory, failed write. Exit code 2.
struct IoError : Error {
    using Error::Error;
};

/// Inconsistent or out-of-range configuration values. Exit code 3.
struct ConfigError : Error {
    using Error::Error;
};

/// Geometry that admits no answer (zero-length ray, flat raster, ...).
struct DegenerateInputError : Error {
    using Error::Error;
};

}  // namespace cephforge
