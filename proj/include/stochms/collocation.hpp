#pragma once

// General s x r stochastic multisymplectic Runge-Kutta stepper on a periodic
// 1D grid.
//
// Cell n spans [x_n, x_{n+1}] x [t_k, t_{k+1}]. Per cell and temporal stage i
// the unknowns are the left-edge value e_i (at x_n), the spatial slopes
// X_{i,m} = delta_x Z_{i,m}, and the combined stage increments
// S_{i,m} = dt delta_t^A Z_{i,m} + dW delta_t^M Z_{i,m}. Stage values follow
// from the temporal relation Z_{i,m} = z_{0,m} + sum_j abar_ij S_{j,m}. The
// residual is
//
//   Z_{i,m} - e_i - dx sum_l a_ml X_{i,l}                         (stage, space)
//   e_i(n+1) - e_i(n) - dx sum_l b_l X_{i,l}                       (edge update)
//   M S_{i,m} + (dt K + dW Kt) X_{i,m} - dt gH(Z) - dW gHt(Z)      (defining)
//
// so no division by dW occurs. Unknowns are ordered cell-major, then temporal
// stage, then [edge, slopes by spatial stage, increments by spatial stage],
// then component.

#include <string>
#include <utility>

#include "stochms/linalg.hpp"
#include "stochms/system.hpp"
#include "stochms/tableau.hpp"

namespace stochms {

struct Grid1D {
  int n_cells = 0;
  double dx = 0.0;
  double x0 = 0.0;

  /// Throws ConfigError unless dx > 0 and n_cells >= 3.
  void validate() const;
  double node(int n) const { return x0 + dx * n; }
  double length() const { return dx * n_cells; }
};

/// One m-vector per (cell, spatial stage), cell-major.
struct CellField {
  int n_cells = 0;
  int stages = 1;
  int m = 0;
  Vec values;

  CellField() = default;
  CellField(int n_cells_, int stages_, int m_)
      : n_cells(n_cells_), stages(stages_), m(m_), values(Vec::Zero(n_cells_ * stages_ * m_)) {}

  Eigen::Index offset(int cell, int stage) const {
    return (static_cast<Eigen::Index>(cell) * stages + stage) * m;
  }
  auto at(int cell, int stage = 0) { return values.segment(offset(cell, stage), m); }
  auto at(int cell, int stage = 0) const { return values.segment(offset(cell, stage), m); }
};

/// z(t_k, x_n + c_m dx) for every cell n and spatial stage m.
struct FieldState : CellField {
  double t = 0.0;
  using CellField::CellField;
};

/// A perturbation aligned with a FieldState.
struct TangentField : CellField {
  using CellField::CellField;
};

/// Internal stage data of one step (or of one tangent step).
struct StageValues {
  int n_cells = 0, r = 0, s = 0, m = 0;
  Vec unknowns;  // solver layout, see file comment
  Vec Z;         // (cell, i, spatial stage, component)

  Eigen::Index block() const { return static_cast<Eigen::Index>(r) * m * (1 + 2 * s); }
  Eigen::Index edge_offset(int cell, int i) const { return cell * block() + i * m * (1 + 2 * s); }
  Eigen::Index slope_offset(int cell, int i, int stage) const { return edge_offset(cell, i) + m * (1 + stage); }
  Eigen::Index increment_offset(int cell, int i, int stage) const {
    return edge_offset(cell, i) + m * (1 + s + stage);
  }
  Eigen::Index stage_offset(int cell, int i, int stage) const {
    return ((static_cast<Eigen::Index>(cell) * r + i) * s + stage) * m;
  }

  /// z_{i,0} of cell n (value on the left edge x_n at temporal stage i).
  auto edge(int cell, int i) const { return unknowns.segment(edge_offset(cell, i), m); }
  /// delta_x Z_{i,m}
  auto slope(int cell, int i, int stage) const { return unknowns.segment(slope_offset(cell, i, stage), m); }
  /// dt delta_t^A Z_{i,m} + dW delta_t^M Z_{i,m}
  auto increment(int cell, int i, int stage) const {
    return unknowns.segment(increment_offset(cell, i, stage), m);
  }
  auto stage(int cell, int i, int stage) const { return Z.segment(stage_offset(cell, i, stage), m); }
};

enum class SolverKind { FixedPoint, Newton };

std::string to_string(SolverKind k);
SolverKind solver_kind_from_string(const std::string& s);

/// Fixed point is the chord iteration u <- u - J0^{-1} F(u) with J0 the
/// Jacobian at the initial guess; Newton refactors every iteration. Both stop
/// once the max-norm of the applied correction (the residual of the
/// fixed-point map) is at most `tolerance`.
struct SolverConfig {
  SolverKind kind = SolverKind::FixedPoint;
  double tolerance = 1e-6;
  int max_iter = 100;
};

struct StepReport {
  int iterations = 0;
  double residual_norm = 0.0;  // last correction norm
  SolverKind solver = SolverKind::FixedPoint;
  bool clamped_increment = false;
  bool non_symplectic_tableau = false;  // warning only; the step is still taken
};

struct StepResult {
  FieldState state;
  StageValues stages;
  StepReport report;
};

struct TangentStep {
  TangentField next;
  StageValues stages;  // linearized stage data; edges are the tangent edge values
};

/// Advances all cells by one step of size dt with Wiener increment dW.
/// Throws SolverError (with the last residual) when the tolerance is not met,
/// DivergenceError on a non-finite residual, ConfigError on unusable tableaux.
StepResult step(const MultisymplecticSystem& sys, const Grid1D& grid, const FieldState& state, double dW,
                double dt, const TableauPair& tab, const SolverConfig& solver = {});

/// Propagates a tangent through the exact linearization of the step that
/// produced `stages`. Solved as one sparse linear system.
TangentStep step_tangent(const MultisymplecticSystem& sys, const Grid1D& grid, const StageValues& stages,
                         const TangentField& tangent, double dW, double dt, const TableauPair& tab);

/// Max-norm of the defining relations and stage relations for `stages`
/// against `state` (the level the step started from).
double stage_residual(const MultisymplecticSystem& sys, const Grid1D& grid, const FieldState& state,
                      const StageValues& stages, double dW, double dt, const TableauPair& tab);

}  // namespace stochms
