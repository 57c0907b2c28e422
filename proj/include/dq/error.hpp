#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dq {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A floating-point P-value could not be matched to any support point.
class SnapError : public Error {
 public:
  SnapError(std::size_t index, double value);
  std::size_t index() const noexcept { return index_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t index_;
  double value_;
};

/// Tied (or zero, for signed-rank) observations passed to a rank statistic.
class TieError : public Error {
 public:
  using Error::Error;
};

/// The permutation space exceeds the enumeration cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Sample variance is zero where a parametric test needs it positive.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// An iterative routine failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed external input (files, configs).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace dq
