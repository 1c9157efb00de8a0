#pragma once

#include <stdexcept>
#include <string>

namespace mpnls {

// A stated invariant failed on computed data (exit code 2 in the CLI).
struct InvariantViolation : std::runtime_error {
    explicit InvariantViolation(const std::string& what) : std::runtime_error(what) {}
};

// A solver or quadrature failed to converge (exit code 3 in the CLI).
struct NumericalFailure : std::runtime_error {
    explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mpnls
