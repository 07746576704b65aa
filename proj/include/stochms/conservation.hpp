#pragma once

// Discrete conservation laws of the collocation scheme and the global NLS
// invariants.
//
// Two-form law, per cell:
//   sum_l b_l [w1_l - w0_l] dx + sum_i bbar_i [k_i(n+1) - k_i(n)] dt
//                               + sum_i betabar_i [kt_i(n+1) - kt_i(n)] dW = 0
// with w = U^T M V on time-level cell values, k = U^T K V and kt = U^T Kt V on
// edge values of the tangent stages.

#include <vector>

#include "stochms/collocation.hpp"
#include "stochms/nls.hpp"
#include "stochms/system.hpp"
#include "stochms/tableau.hpp"

namespace stochms {

/// The three bracketed terms of the two-form law for one cell.
struct TwoFormSample {
  int cell = 0;
  double omega = 0.0;       // sum_l b_l [w1_l - w0_l] dx
  double kappa = 0.0;       // sum_i bbar_i [k_i(n+1) - k_i(n)] dt
  double kappatilde = 0.0;  // sum_i betabar_i [kt_i(n+1) - kt_i(n)] dW

  double residual() const { return omega + kappa + kappatilde; }
  double scale() const;
  /// |residual| / (|omega| + |kappa| + |kappatilde| + 1e-300)
  double relative() const;
};

struct ConservationReport {
  std::vector<double> cell_residuals;
  double max_residual = 0.0;  // relative for the two-form law, absolute for momentum
  double before = 0.0;        // global functional at t_k (momentum only)
  double after = 0.0;         // global functional at t_{k+1}
  bool guaranteed = true;     // false when run with allow_unguaranteed on a law that need not hold
  std::vector<TwoFormSample> samples;
};

struct TangentPair {
  TangentField u0;
  TangentStep u;
  TangentField v0;
  TangentStep v;
};

/// Evaluates the two-form law for a tangent pair propagated over one step.
/// Throws UnguaranteedLawError for non-symplectic tableaux unless
/// `allow_unguaranteed` is set (negative controls).
ConservationReport check_two_form_law(const MultisymplecticSystem& sys, const Grid1D& grid,
                                      const TableauPair& tab, const TangentPair& pair, double dW, double dt,
                                      bool allow_unguaranteed = false);

/// P(c) = sum_n sum_l b_l (1/2) <M delta_x c_{n,l}, c_{n,l}> dx, delta_x the
/// periodic forward difference across cells.
double discrete_momentum(const MultisymplecticSystem& sys, const Grid1D& grid, const TableauPair& tab,
                         const CellField& state);

/// Primary check: |P(after) - P(before)| in max_residual. The per-cell
/// entries are the local law dx [I_1 - I_0] + F(n+1) - F(n) with the flux
/// F = dt H(Z) + dW Ht(Z) - (1/2)<M S, Z> taken at stage points (diagnostic).
/// Throws UnguaranteedLawError for non-quadratic Hamiltonians unless
/// `allow_unguaranteed` is set.
ConservationReport check_momentum_law(const MultisymplecticSystem& sys, const Grid1D& grid,
                                      const FieldState& before, const StepResult& after, double dW, double dt,
                                      const TableauPair& tab, bool allow_unguaranteed = false);

/// sum_n (p_n^2 + q_n^2) dx
double global_density(const PsiField& state, const Grid1D& grid);

/// sum_n (p_n Dq_n - q_n Dp_n) dx with D the centred difference.
double global_momentum(const PsiField& state, const Grid1D& grid);

}  // namespace stochms
