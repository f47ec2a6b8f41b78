#pragma once

#include <stdexcept>
#include <string>

namespace ftns {

// Malformed or out-of-contract input (bad parameters, unparsable files).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Configuration document errors; the CLI maps these to exit code 2.
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

// Evaluation at a point where the quantity is undefined (e.g. S_1/f at omega = 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Numerical failure: divergent integrals, non-convergent fits, failed consistency checks.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergentIntegral : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace ftns
