#include "stochms/nls.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "stochms/errors.hpp"

namespace stochms {

namespace {

double envelope(double x, const SolitonParams& s) { return s.width / std::cosh(s.width * (x - s.center)); }


ReducedStep reduced_step(const PsiField& state, double dt, const Grid1D& grid, const SolverConfig& solver,
                         kernels::Mode mode, const kernels::ReducedCoefficients& co) {
  grid.validate();
  if (state.size() != grid.n_cells || state.q.size() != state.p.size()) {
    throw StructureError("field does not match grid");
  }
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const int N = grid.n_cells;
  std::span<const double> p(state.p.data(), N), q(state.q.data(), N);

  Vec u(2 * N);
  for (int n = 0; n < N; ++n) {
    u[2 * n] = state.p[n];
    u[2 * n + 1] = state.q[n];
  }
  Vec R(2 * N);
  auto evaluate = [&] {
    kernels::reduced_residual(mode, co, p, q, view(std::as_const(u)), view(R));
    return kernels::max_abs(mode, view(std::as_const(R)));
  };

  StepReport report;
  report.solver = solver.kind;
  Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>> lu;
  const bool newton = solver.kind == SolverKind::Newton;
  std::optional<kernels::CirculantSolver> chord;
  if (!newton) chord.emplace(co, N);
  Vec d(2 * N);
  double norm = evaluate();
  while (true) {
    if (!std::isfinite(norm)) throw DivergenceError("non-finite residual", norm, report.iterations);
    if (report.iterations >= solver.max_iter) {
      throw SolverError("reduced solve did not reach tolerance in " + std::to_string(solver.max_iter) +
                            " iterations",
                        norm, report.iterations);
    }
    if (newton) {
      lu.compute(kernels::reduced_jacobian(co, p, q, view(std::as_const(u)), true));
      if (lu.info() != Eigen::Success) throw SolverError("singular reduced Jacobian", norm, report.iterations);
      d = lu.solve(R);
    } else {
      chord->solve(view(std::as_const(R)), view(d));
    }
    u -= d;
    ++report.iterations;
    norm = kernels::max_abs(mode, view(std::as_const(d)));
    if (norm <= solver.tolerance) break;
    if (!std::isfinite(evaluate())) norm = std::numeric_limits<double>::quiet_NaN();
  }
  report.residual_norm = norm;

  ReducedStep out;
  out.state.t = state.t + dt;
  out.state.p.resize(N);
  out.state.q.resize(N);
  for (int n = 0; n < N; ++n) {
    out.state.p[n] = u[2 * n];
    out.state.q[n] = u[2 * n + 1];
  }
  out.report = report;
  return out;
}

// v_{n} + v_{n+1} = 2 f_n on a periodic grid, f already free of Nyquist when N is even.
Vec solve_average(const Vec& f) {
  const auto N = f.size();
  Vec v(N);
  double v0 = 0.0;
  if (N % 2 == 1) {
    // v_0 = sum_j (-1)^(N-1-j) f_j
    for (Eigen::Index j = 0; j < N; ++j) v0 += ((N - 1 - j) % 2 == 0 ? 1.0 : -1.0) * f[j];
  }
  v[0] = v0;
  for (Eigen::Index n = 0; n + 1 < N; ++n) v[n + 1] = 2.0 * f[n] - v[n];
  return v;
}

Vec remove_nyquist(const Vec& f) {
  const auto N = f.size();
  double c = 0.0;
  for (Eigen::Index j = 0; j < N; ++j) c += (j % 2 == 0 ? 1.0 : -1.0) * f[j];
  c /= static_cast<double>(N);
  Vec out = f;
  for (Eigen::Index j = 0; j < N; ++j) out[j] -= (j % 2 == 0 ? 1.0 : -1.0) * c;
  return out;
}

Vec forward_difference(const Vec& f, double dx) {
  const auto N = f.size();
  Vec d(N);
  for (Eigen::Index n = 0; n < N; ++n) d[n] = (f[(n + 1) % N] - f[n]) / dx;
  return d;
}

Vec aux_from(const Vec& f, double dx, bool even) {
  Vec rhs = forward_difference(f, dx);
  if (!even) return solve_average(rhs);
  return remove_nyquist(solve_average(remove_nyquist(rhs)));
}

}  // namespace

PsiField initial_condition(const Grid1D& grid, const SolitonParams& params) {
  return exact_soliton_field(grid, 0.0, 0.0, params);
}

PsiValue exact_soliton(double x, double t, double W, const SolitonParams& s) {
  if (s.kappa != -1.0) throw ConfigError("the bright soliton needs kappa = -1");
  const double xt = x - s.xi * W;
  const double amp = envelope(xt - s.speed * t, s);
  const double theta = s.wavenumber * xt + s.phase_rate * t;
  return {amp * std::cos(theta), amp * std::sin(theta)};
}

PsiField exact_soliton_field(const Grid1D& grid, double t, double W, const SolitonParams& params) {
  grid.validate();
  PsiField f;
  f.t = t;
  f.p.resize(grid.n_cells);
  f.q.resize(grid.n_cells);
  for (int n = 0; n < grid.n_cells; ++n) {
    const auto v = exact_soliton(grid.node(n), t, W, params);
    f.p[n] = v.p;
    f.q[n] = v.q;
  }
  return f;
}

ReducedStep midpoint_step_transport(const PsiField& state, double dW, double dt, const Grid1D& grid,
                                    double kappa, double xi, const SolverConfig& solver, kernels::Mode mode) {
  return reduced_step(state, dt, grid, solver, mode,
                            kernels::transport_coefficients(kappa, xi, dt, dW, grid.dx));
}

ReducedStep midpoint_step_dispersion(const PsiField& state, double dW, double dt, const Grid1D& grid,
                                     double kappa, double epsilon, const SolverConfig& solver,
                                     kernels::Mode mode) {
  return reduced_step(state, dt, grid, solver, mode,
                            kernels::dispersion_coefficients(kappa, epsilon, dt, dW, grid.dx));
}

AuxFields reconstruct_aux(const PsiField& state, const Grid1D& grid) {
  grid.validate();
  if (state.size() != grid.n_cells) throw StructureError("field does not match grid");
  const bool even = grid.n_cells % 2 == 0;
  return {aux_from(state.p, grid.dx, even), aux_from(state.q, grid.dx, even), even};
}

FieldState to_cell_state(const PsiField& state, const Grid1D& grid) {
  const AuxFields aux = reconstruct_aux(state, grid);
  const int N = grid.n_cells;
  FieldState cells(N, 1, 4);
  cells.t = state.t;
  for (int n = 0; n < N; ++n) {
    const int k = (n + 1) % N;
    cells.at(n) << 0.5 * (state.p[n] + state.p[k]), 0.5 * (state.q[n] + state.q[k]), 0.5 * (aux.v[n] + aux.v[k]),
        0.5 * (aux.w[n] + aux.w[k]);
  }
  return cells;
}

PsiField cell_average(const PsiField& state) {
  const int N = state.size();
  PsiField out;
  out.t = state.t;
  out.p.resize(N);
  out.q.resize(N);
  for (int n = 0; n < N; ++n) {
    out.p[n] = 0.5 * (state.p[n] + state.p[(n + 1) % N]);
    out.q[n] = 0.5 * (state.q[n] + state.q[(n + 1) % N]);
  }
  return out;
}

double track_peak(const PsiField& state, const Grid1D& grid) {
  const int N = state.size();
  if (N != grid.n_cells) throw StructureError("field does not match grid");
  auto density = [&](int n) {
    n = ((n % N) + N) % N;
    return state.p[n] * state.p[n] + state.q[n] * state.q[n];
  };
  int best = 0;
  for (int n = 1; n < N; ++n) {
    if (density(n) > density(best)) best = n;
  }
  const double dm = density(best - 1), d0 = density(best), dp = density(best + 1);
  const double curv = dm - 2.0 * d0 + dp;
  const double shift = curv < 0.0 ? 0.5 * (dm - dp) / curv : 0.0;
  double x = grid.node(best) + shift * grid.dx;
  const double L = grid.length();
  x = grid.x0 + std::fmod(std::fmod(x - grid.x0, L) + L, L);
  return x;
}

}  // namespace stochms
