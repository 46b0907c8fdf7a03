#pragma once

#include <stdexcept>
#include <string>

namespace qcdiff {

// Invalid inputs, malformed files, broken preconditions. CLI exit code 2.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-convergence, NaN losses, unitarity violations. CLI exit code 3.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace qcdiff
