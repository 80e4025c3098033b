#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rte {

// Malformed inputs: bad grid sizes, points outside the domain, modes outside
// the truncation set, unparseable config. CLI exit code 1.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative solve failed to reach its tolerance; carries the residual
// history for post-mortems. CLI exit code 2.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

// A factorization hit a singular or non-finite pivot block. CLI exit code 3.
class FactorizationError : public std::runtime_error {
 public:
  explicit FactorizationError(const std::string& what)
      : std::runtime_error(what) {}
};

// A mathematical identity that should hold (conjugate symmetry, residual
// bounds) was violated beyond tolerance; signals a broken setup rather than
// bad user input.
class ConsistencyError : public std::runtime_error {
 public:
  explicit ConsistencyError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace rte
