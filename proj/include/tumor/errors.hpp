#pragma once

#include <stdexcept>
#include <string>

namespace tumor {

/// Bad input: invalid model, parameter outside its admissible range, malformed config.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical solver did not meet its contract (bracket, convergence, overflow).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A shape left the admissible neighbourhood ||rho||_inf < 1/4.
class DomainExitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tumor
