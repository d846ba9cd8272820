#pragma once

#include <stdexcept>
#include <string>

namespace gcrp {

// Bad inputs: shapes, config values, unreadable files, mismatched pairs.
// Maps to exit code 2 at the CLI boundary.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: NaN gradients, diverged training. Exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gcrp
