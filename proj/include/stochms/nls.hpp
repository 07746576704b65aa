#pragma once

#include <string>

#include "stochms/collocation.hpp"
#include "stochms/linalg.hpp"
#include "stochms/nls_kernels.hpp"

namespace stochms {

/// psi = p + i q sampled at grid nodes.
struct PsiField {
  double t = 0.0;
  Vec p;
  Vec q;

  int size() const { return static_cast<int>(p.size()); }
};

/// Bright soliton family of the focusing equation.
struct SolitonParams {
  double kappa = -1.0;
  double xi = 0.1;
  double center = 15.0;
  double width = 0.70710678118654752440;  // amplitude and inverse width, 1/sqrt(2)
  double wavenumber = 1.0 / 20.0;
  double phase_rate = 199.0 / 400.0;
  double speed = 1.0 / 10.0;
};

/// p = A cos(x/20), q = A sin(x/20), A = sech((x - 15)/sqrt(2)) / sqrt(2).
PsiField initial_condition(const Grid1D& grid, const SolitonParams& params = {});

struct PsiValue {
  double p;
  double q;
};

/// Soliton at (x, t) translated by xi W(t): xt = x - xi W,
/// p = A(xt, t) cos(theta), q = A(xt, t) sin(theta), theta = k xt + omega t.
/// Requires params.kappa == -1.
PsiValue exact_soliton(double x, double t, double W, const SolitonParams& params = {});
PsiField exact_soliton_field(const Grid1D& grid, double t, double W, const SolitonParams& params = {});

struct ReducedStep {
  PsiField state;
  StepReport report;
};

ReducedStep midpoint_step_transport(const PsiField& state, double dW, double dt, const Grid1D& grid,
                                    double kappa, double xi, const SolverConfig& solver = {},
                                    kernels::Mode mode = kernels::Mode::Parallel);

ReducedStep midpoint_step_dispersion(const PsiField& state, double dW, double dt, const Grid1D& grid,
                                     double kappa, double epsilon, const SolverConfig& solver = {},
                                     kernels::Mode mode = kernels::Mode::Parallel);

struct AuxFields {
  Vec v;
  Vec w;
  bool nyquist_projected = false;
};

/// Solves delta_x p = A_x v and delta_x q = A_x w on the periodic grid. On even
/// grids A_x annihilates the Nyquist mode; the right-hand side is projected
/// off it and the Nyquist component of v, w is set to zero.
AuxFields reconstruct_aux(const PsiField& state, const Grid1D& grid);

/// Cell values A_x (p, q, v, w) in the 4-component layout of the collocation
/// engine (midpoint tableau).
FieldState to_cell_state(const PsiField& state, const Grid1D& grid);

/// A_x p, A_x q per cell.
PsiField cell_average(const PsiField& state);

/// Parabola through the largest |psi|^2 node and its neighbours. Returns a
/// position in [x0, x0 + length).
double track_peak(const PsiField& state, const Grid1D& grid);

}  // namespace stochms
