#pragma once

#include <stdexcept>
#include <string>

namespace stochms {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration or invalid operation arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Dimension mismatch or malformed structure data.
class StructureError : public Error {
 public:
  using Error::Error;
};

/// A conservation check was asked for a law that does not hold for its inputs.
class UnguaranteedLawError : public Error {
 public:
  using Error::Error;
};

/// Nonlinear or linear solve did not reach tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double last_residual, int iterations)
      : Error(what), last_residual_(last_residual), iterations_(iterations) {}

  double last_residual() const { return last_residual_; }
  int iterations() const { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

/// Residual became NaN or infinite during a solve.
class DivergenceError : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace stochms
