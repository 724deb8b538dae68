#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace medex {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch or an otherwise malformed argument.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A requested mode is not backed by the problem (e.g. analytic Jacobian missing).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Problem descriptor parameters do not define a monotone operator.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// Order or problem kind outside what an operation implements.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Shifted linear system singular at working precision.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double shift)
      : Error(what), shift_(shift) {}
  double shift() const { return shift_; }

 private:
  double shift_;
};

/// Secular bracket endpoints share a sign; only possible for non-monotone input.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Iterative solve ran out of iterations. Carries the best iterate seen.
class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& what, Eigen::VectorXd best, double best_residual)
      : Error(what), best_(std::move(best)), best_residual_(best_residual) {}
  const Eigen::VectorXd& best() const { return best_; }
  double best_residual() const { return best_residual_; }

 private:
  Eigen::VectorXd best_;
  double best_residual_;
};

/// A quantity that is provably nonnegative came out negative beyond tolerance.
class InternalInconsistencyError : public Error {
 public:
  using Error::Error;
};

/// Wraps a failure inside an iterative driver with the iteration it happened at.
class IterationError : public Error {
 public:
  IterationError(const std::string& what, std::size_t iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace medex
