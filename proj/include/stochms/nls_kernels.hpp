#pragma once

// Per-node kernels of the reduced (p, q) implicit midpoint schemes. Every
// kernel has a serial reference and an OpenMP variant; both evaluate the
// same per-node expression, so their outputs are bitwise identical.
//
// Equation n couples nodes n, n+1, n+2 (periodic):
//
//   Rp = Ax^2 (p' - p) + sigma dx^2 (q' + q) + tau Ax dx (p' + p) - nu Ax(|Y|^2 Yq)
//   Rq = Ax^2 (q' - q) - sigma dx^2 (p' + p) + tau Ax dx (q' + q) + nu Ax(|Y|^2 Yp)
//
// with Y = Ax At (p, q) on cells, dx^2 the second forward difference, and
//   transport:  sigma = dt/2,            tau = xi dW / 2
//   dispersion: sigma = (dt + eps dW)/2, tau = 0
//   nu = 2 kappa dt.

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "stochms/linalg.hpp"

namespace stochms::kernels {

enum class Mode { Serial, Parallel };

struct ReducedCoefficients {
  double sigma = 0.0;
  double tau = 0.0;
  double nu = 0.0;
  double dx = 0.0;
};

ReducedCoefficients transport_coefficients(double kappa, double xi, double dt, double dW, double dx);
ReducedCoefficients dispersion_coefficients(double kappa, double epsilon, double dt, double dW, double dx);

/// Residual in interleaved layout out[2n] = Rp[n], out[2n+1] = Rq[n].
/// `next` is interleaved (p'_0, q'_0, p'_1, ...).
void reduced_residual(Mode mode, const ReducedCoefficients& c, std::span<const double> p,
                      std::span<const double> q, std::span<const double> next, std::span<double> out);

/// Cell midpoint values Y = Ax At (p, q) and the cubic g = |Y|^2 Y.
void cubic_term(Mode mode, std::span<const double> p, std::span<const double> q, std::span<const double> next,
                std::span<double> gp, std::span<double> gq);

/// Jacobian of the residual with respect to `next` (interleaved).
/// With `include_cubic` false, only the constant linear part.
SparseMat reduced_jacobian(const ReducedCoefficients& c, std::span<const double> p, std::span<const double> q,
                           std::span<const double> next, bool include_cubic);

/// Inverse of the constant linear part of the reduced Jacobian. On
/// psi = p + i q the operator acts as the scalar stencil
/// Ax^2 + tau Ax dx - i sigma dx^2, so it is diagonalised by one complex DFT.
class CirculantSolver {
 public:
  CirculantSolver(const ReducedCoefficients& c, int n_nodes);
  ~CirculantSolver();
  CirculantSolver(const CirculantSolver&) = delete;
  CirculantSolver& operator=(const CirculantSolver&) = delete;

  /// Solves L d = r for interleaved r, d.
  void solve(std::span<const double> r, std::span<double> d) const;

 private:
  struct Plan;
  int n_;
  std::vector<std::complex<double>> inverse_symbol_;
  std::unique_ptr<Plan> plan_;
};

/// Max-norm of a vector; the parallel variant reduces with max, which is exact.
double max_abs(Mode mode, std::span<const double> v);

}  // namespace stochms::kernels
