#pragma once

#include <stdexcept>
#include <string>

namespace kse {

// Bad run configuration or precondition violation (odd grid size, missing
// file, invalid parameter combination). Maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mismatched array/grid sizes between operands.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when the solution leaves the finite regime. Carries the simulation
// time and the offending norm so callers can report and persist the last
// good state. Maps to CLI exit code 3.
struct BlowupError : std::runtime_error {
    double t;
    double norm;
    BlowupError(double t_, double norm_, const std::string& what_)
        : std::runtime_error(what_), t(t_), norm(norm_) {}
};

}  // namespace kse
