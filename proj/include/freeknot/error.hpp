#pragma once

#include <stdexcept>
#include <string>

namespace freeknot {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// The simplex core lost numerical stability (tiny pivots after refactorization).
class NumericError : public Error {
public:
  using Error::Error;
};

/// An invariant of the solver itself was broken, e.g. an infeasible MILP.
class InternalError : public Error {
public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
  DivergenceError(std::size_t epoch, const std::string& what)
      : Error(what), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

private:
  std::size_t epoch_;
};

/// Input file could not be parsed.
class ParseError : public Error {
public:
  using Error::Error;
};

}  // namespace freeknot
