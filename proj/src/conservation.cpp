#include "stochms/conservation.hpp"

#include <algorithm>
#include <cmath>

#include "stochms/errors.hpp"

namespace stochms {

double TwoFormSample::scale() const { return std::abs(omega) + std::abs(kappa) + std::abs(kappatilde); }

double TwoFormSample::relative() const { return std::abs(residual()) / (scale() + 1e-300); }

namespace {

void check_field(const CellField& f, const Grid1D& grid, const TableauPair& tab, int m) {
  if (f.n_cells != grid.n_cells || f.stages != tab.s() || f.m != m) {
    throw StructureError("field layout does not match grid, tableau and system");
  }
}

// U^T A V for skew A, summed over the upper triangle so that U = V gives exactly 0.
double skew_form(const Mat& A, const Eigen::Ref<const Vec>& u, const Eigen::Ref<const Vec>& v) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < A.cols(); ++j) {
      if (A(i, j) != 0.0) s += A(i, j) * (u[i] * v[j] - u[j] * v[i]);
    }
  }
  return s;
}

}  // namespace

ConservationReport check_two_form_law(const MultisymplecticSystem& sys, const Grid1D& grid,
                                      const TableauPair& tab, const TangentPair& pair, double dW, double dt,
                                      bool allow_unguaranteed) {
  grid.validate();
  const bool symplectic = check_symplecticity(tab).pass;
  if (!symplectic && !allow_unguaranteed) {
    throw UnguaranteedLawError("tableau '" + tab.name +
                               "' violates the symplecticity conditions; the two-form law is not guaranteed");
  }
  for (const CellField* f : {static_cast<const CellField*>(&pair.u0), static_cast<const CellField*>(&pair.v0),
                             static_cast<const CellField*>(&pair.u.next),
                             static_cast<const CellField*>(&pair.v.next)}) {
    check_field(*f, grid, tab, sys.m);
  }
  const Mat& M = sys.M.entries();
  const Mat& K = sys.K.entries();
  const Mat& Kt = sys.Ktilde.entries();
  const auto& b = tab.spatial.b;
  const auto& bbar = tab.drift.b;
  const auto& betabar = tab.diffusion.b;
  const StageValues& su = pair.u.stages;
  const StageValues& sv = pair.v.stages;

  ConservationReport rep;
  rep.guaranteed = symplectic;
  const int N = grid.n_cells;
  rep.samples.resize(N);
  rep.cell_residuals.resize(N);
  for (int n = 0; n < N; ++n) {
    const int next = (n + 1) % N;
    TwoFormSample& smp = rep.samples[n];
    smp.cell = n;
    for (int l = 0; l < tab.s(); ++l) {
      const double w1 = skew_form(M, pair.u.next.at(n, l), pair.v.next.at(n, l));
      const double w0 = skew_form(M, pair.u0.at(n, l), pair.v0.at(n, l));
      smp.omega += b[l] * (w1 - w0) * grid.dx;
    }
    for (int i = 0; i < tab.r(); ++i) {
      const auto u1 = su.edge(next, i), v1 = sv.edge(next, i);
      const auto u0 = su.edge(n, i), v0 = sv.edge(n, i);
      smp.kappa += bbar[i] * (skew_form(K, u1, v1) - skew_form(K, u0, v0)) * dt;
      smp.kappatilde += betabar[i] * (skew_form(Kt, u1, v1) - skew_form(Kt, u0, v0)) * dW;
    }
    rep.cell_residuals[n] = smp.relative();
    rep.max_residual = std::max(rep.max_residual, rep.cell_residuals[n]);
  }
  return rep;
}

double discrete_momentum(const MultisymplecticSystem& sys, const Grid1D& grid, const TableauPair& tab,
                         const CellField& state) {
  check_field(state, grid, tab, sys.m);
  const Mat& M = sys.M.entries();
  const int N = grid.n_cells;
  double P = 0.0;
  for (int n = 0; n < N; ++n) {
    const int next = (n + 1) % N;
    for (int l = 0; l < tab.s(); ++l) {
      const Vec d = (state.at(next, l) - state.at(n, l)) / grid.dx;
      P += tab.spatial.b[l] * 0.5 * (M * d).dot(state.at(n, l)) * grid.dx;
    }
  }
  return P;
}

ConservationReport check_momentum_law(const MultisymplecticSystem& sys, const Grid1D& grid,
                                      const FieldState& before, const StepResult& after, double dW, double dt,
                                      const TableauPair& tab, bool allow_unguaranteed) {
  const bool quadratic = sys.ham.is_quadratic();
  if (!quadratic && !allow_unguaranteed) {
    throw UnguaranteedLawError("system '" + sys.label +
                               "' has a non-quadratic Hamiltonian; the momentum law is not guaranteed");
  }
  check_field(before, grid, tab, sys.m);
  check_field(after.state, grid, tab, sys.m);

  ConservationReport rep;
  rep.guaranteed = quadratic;
  rep.before = discrete_momentum(sys, grid, tab, before);
  rep.after = discrete_momentum(sys, grid, tab, after.state);
  rep.max_residual = std::abs(rep.after - rep.before);

  const Mat& M = sys.M.entries();
  const int N = grid.n_cells;
  const StageValues& st = after.stages;
  auto local_I = [&](const CellField& c, int n, int l) {
    const Vec d = (c.at((n + 1) % N, l) - c.at(n, l)) / grid.dx;
    return 0.5 * (M * d).dot(c.at(n, l));
  };
  auto flux = [&](int n) {
    double F = 0.0;
    for (int i = 0; i < tab.r(); ++i) {
      for (int l = 0; l < tab.s(); ++l) {
        const Vec z = st.stage(n, i, l);
        const Vec S = st.increment(n, i, l);
        F += tab.drift.b[i] * tab.spatial.b[l] *
             (dt * sys.ham.value(z) + dW * sys.ham.stoch_value(z) - 0.5 * (M * S).dot(z));
      }
    }
    return F;
  };
  rep.cell_residuals.resize(N);
  for (int n = 0; n < N; ++n) {
    double dI = 0.0;
    for (int l = 0; l < tab.s(); ++l) {
      dI += tab.spatial.b[l] * (local_I(after.state, n, l) - local_I(before, n, l));
    }
    rep.cell_residuals[n] = dI * grid.dx + flux((n + 1) % N) - flux(n);
  }
  return rep;
}

double global_density(const PsiField& state, const Grid1D& grid) {
  return (state.p.squaredNorm() + state.q.squaredNorm()) * grid.dx;
}

double global_momentum(const PsiField& state, const Grid1D& grid) {
  const int N = state.size();
  double J = 0.0;
  for (int n = 0; n < N; ++n) {
    const int up = (n + 1) % N, down = (n + N - 1) % N;
    const double dq = (state.q[up] - state.q[down]) / (2.0 * grid.dx);
    const double dp = (state.p[up] - state.p[down]) / (2.0 * grid.dx);
    J += state.p[n] * dq - state.q[n] * dp;
  }
  return J * grid.dx;
}

}  // namespace stochms
