#pragma once

#include <stdexcept>
#include <string>

namespace magopt {

// Bad user input: malformed files, inconsistent configuration, violated preconditions.
// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: a solver did not reach its tolerance, a system is singular.
// The CLI maps this to exit code 1.
class SolverError : public std::runtime_error {
  public:
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace magopt
