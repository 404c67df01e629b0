#pragma once

#include <stdexcept>
#include <string>

namespace skr {

/// Bad caller input. The CLI maps every subclass to exit code 2.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a function (e.g. |t| > 1 for a profile).
class DomainError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Parameter outside the range where a formula is defined.
class OutOfRange : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Configuration that cannot be run at all (e.g. N(p) >= n in the gap check).
class InfeasibleConfiguration : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Numerical breakdown: non-convergence, identity violated, solver failure. Exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoRootError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace skr
