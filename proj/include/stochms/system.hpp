#pragma once

// Stochastic multisymplectic systems with constant structure matrices:
//
//   M dz + K z_x dt + Ktilde z_x o dW = grad H(z) dt + grad Htilde(z) o dW
//
// Component ordering for the NLS instances is z = (p, q, v, w).

#include <functional>
#include <optional>
#include <string>

#include "stochms/linalg.hpp"

namespace stochms {

class SkewMatrix {
 public:
  SkewMatrix() = default;

  /// Builds A = L - L^T from the strictly lower triangle of `generator`.
  static SkewMatrix from_lower(const Mat& generator);
  static SkewMatrix zero(int dim);
  /// Stores `entries` verbatim. Only for exercising the validator.
  static SkewMatrix unchecked(Mat entries);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Mat& entries() const { return entries_; }
  double operator()(int r, int c) const { return entries_(r, c); }

  SkewMatrix scaled(double s) const;
  /// max |A + A^T|
  double skew_residual() const;

 private:
  explicit SkewMatrix(Mat entries) : entries_(std::move(entries)) {}
  Mat entries_;
};

struct HamiltonianPair {
  std::function<double(const Vec&)> value;
  std::function<double(const Vec&)> stoch_value;
  std::function<Vec(const Vec&)> grad;
  std::function<Vec(const Vec&)> stoch_grad;
  std::function<Mat(const Vec&)> hess;
  std::function<Mat(const Vec&)> stoch_hess;

  // Set iff H(z) = <z, A z> and Htilde(z) = <z, Atilde z>.
  std::optional<Mat> quad_A;
  std::optional<Mat> quad_Atilde;

  bool is_quadratic() const { return quad_A.has_value() && quad_Atilde.has_value(); }
};

struct MultisymplecticSystem {
  int m = 0;
  SkewMatrix M;
  SkewMatrix K;
  SkewMatrix Ktilde;
  HamiltonianPair ham;
  std::string label;
};

struct ValidationOptions {
  double exact_tol = 1e-8;
  double fd_tol = 1e-5;
  double fd_step = 1e-5;
  int samples = 100;
  unsigned long long seed = 12345;
  double sample_radius = 1.0;
};

struct StructureReport {
  double skew_residual = 0.0;           // max over M, K, Ktilde
  double hessian_symmetry_residual = 0.0;
  double grad_fd_residual = 0.0;        // relative, grad vs central differences of value
  double hess_fd_residual = 0.0;        // relative, hess vs central differences of grad
  bool pass = false;
};

/// Throws StructureError if the matrices or Hamiltonian disagree on dimension.
StructureReport validate_system(const MultisymplecticSystem& sys,
                                const ValidationOptions& opts = {});

MultisymplecticSystem nls_transport_system(double kappa, double xi);
MultisymplecticSystem nls_dispersion_system(double kappa, double epsilon);
/// The transport system with xi = 0.
MultisymplecticSystem nls_deterministic_system(double kappa);

/// "nls-transport" uses `noise` as xi, "nls-dispersion" as epsilon,
/// "nls-deterministic" ignores it.
MultisymplecticSystem system_by_name(const std::string& name, double kappa, double noise);

}  // namespace stochms
