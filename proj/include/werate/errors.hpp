#pragma once

#include <stdexcept>
#include <string>

namespace werate {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: non-normalized law, negative weight where one is forbidden,
/// reducible chain, violated precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An outcome with zero probability carries non-zero weight, so its weighted
/// information is infinite.
class InfiniteInformationError : public Error {
 public:
  using Error::Error;
};

/// Brute-force enumeration requested beyond the configured string budget.
class SizeGuardError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver failed to converge, or produced a degenerate iterate.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace werate
