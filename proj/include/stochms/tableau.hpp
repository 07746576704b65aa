#pragma once

#include <string>

#include "stochms/linalg.hpp"

namespace stochms {

struct ButcherTableau {
  Mat a;
  Vec b;
  Vec c;

  int stages() const { return static_cast<int>(b.size()); }
};

/// Spatial RK coefficients plus temporal drift and diffusion coefficients.
/// Drift and diffusion share the abscissae d (stored in each tableau's c).
struct TableauPair {
  ButcherTableau spatial;
  ButcherTableau drift;      // abar, bbar, d
  ButcherTableau diffusion;  // alphabar, betabar, d
  std::string name;

  int s() const { return spatial.stages(); }
  int r() const { return drift.stages(); }
  /// Drift and diffusion coefficients coincide entrywise.
  bool shared_temporal_coefficients() const;
};

struct ConsistencyReport {
  double spatial_row_sum = 0.0;    // max |c_m - sum_n a_mn|
  double drift_row_sum = 0.0;      // max |d_i - sum_j abar_ij|
  double diffusion_row_sum = 0.0;  // max |d_i - sum_j alphabar_ij|
  double abscissa_mismatch = 0.0;  // drift and diffusion must share d
  double spatial_weights = 0.0;    // |sum b - 1|
  double drift_weights = 0.0;      // |sum bbar - 1|
  double diffusion_weights = 0.0;  // |sum betabar - 1|
  double max_residual = 0.0;
  bool pass = false;
};

struct SymplecticityReport {
  double spatial = 0.0;          // max_mn |b_m b_n - a_mn b_m - b_n a_nm|
  double drift_drift = 0.0;      // the four temporal families
  double diffusion_diffusion = 0.0;
  double drift_diffusion = 0.0;
  double diffusion_drift = 0.0;
  double max_residual = 0.0;
  bool pass = false;
};

inline constexpr double kTableauTol = 1e-14;

/// Throws StructureError on shape mismatches or zero stages.
void validate_shapes(const TableauPair& tab);

ConsistencyReport check_consistency(const TableauPair& tab, double tol = kTableauTol);
SymplecticityReport check_symplecticity(const TableauPair& tab, double tol = kTableauTol);

/// s = r = 1, all abscissae and coefficients 1/2, weights 1.
TableauPair midpoint_tableau();
/// Two-stage Gauss-Legendre in space and time (drift = diffusion).
TableauPair gauss2_tableau();
/// Explicit Euler in space (a = 0, b = 1, c = 0), implicit midpoint in time.
TableauPair explicit_euler_tableau();

TableauPair tableau_by_name(const std::string& name);

}  // namespace stochms
