#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lacunary {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Requested size exceeds the data (or memory) available.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Operation needs integral frequencies but got real ones.
class TypeError : public Error {
 public:
  using Error::Error;
};

/// A structural constraint on the input is violated (ordering, ratio, gap size).
class ConstraintError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition (for instance an independence certificate) is absent.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class PrecisionError : public Error {
 public:
  using Error::Error;
};

/// Iterative quadrature did not converge; carries the last two iterates.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double previous, double last)
      : Error(what), previous_(previous), last_(last) {}

  double previous() const noexcept { return previous_; }
  double last() const noexcept { return last_; }

 private:
  double previous_;
  double last_;
};

/// Exhaustive enumeration would exceed the configured budget.
class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, std::uint64_t configurations)
      : Error(what), configurations_(configurations) {}

  std::uint64_t configurations() const noexcept { return configurations_; }

 private:
  std::uint64_t configurations_;
};

/// Bad command line or experiment configuration.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace lacunary
