#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace krasno {

/// Base class for every error raised by the toolkit.
///
/// Solvers that fail part-way through a run attach the iterates computed so
/// far, so callers can inspect how far the sequence got before the failure.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}

  const std::vector<double>& partial_trace() const noexcept { return partial_; }
  void attach_trace(std::vector<double> iterates) { partial_ = std::move(iterates); }

 private:
  std::vector<double> partial_;
};

/// A user function failed or produced a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// A point was passed outside the declared domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A solver precondition does not hold (bad config, broken self-map promise, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// h'(x) vanished where a Newton-type step needs to divide by it.
class DerivativeZeroError : public Error {
 public:
  DerivativeZeroError(const std::string& what, double at) : Error(what), at_(at) {}
  double at() const noexcept { return at_; }

 private:
  double at_;
};

/// f(a) and f(b) have the same strict sign.
class BracketError : public Error {
 public:
  using Error::Error;
};

}  // namespace krasno
