#pragma once

#include <stdexcept>
#include <string>

namespace heraldsim {

/// Invalid configuration or inputs that violate a documented precondition.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Iterative solver failed to reach the requested residual.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File or stream I/O failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace heraldsim
