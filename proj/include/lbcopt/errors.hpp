#pragma once

#include <stdexcept>
#include <string>

namespace lbcopt {

// Numerical failure inside a solver: missing root bracket, quadrature that
// cannot reach tolerance, ODE step underflow. Distinct from argument errors
// (std::invalid_argument / std::domain_error) so callers can map it to a
// dedicated process exit code.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace lbcopt
