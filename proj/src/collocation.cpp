#include "stochms/collocation.hpp"

#include <cmath>
#include <limits>

#include "stochms/errors.hpp"

namespace stochms {

void Grid1D::validate() const {
  if (!(dx > 0.0)) throw ConfigError("grid spacing must be positive");
  if (n_cells < 3) throw ConfigError("periodic grid needs at least 3 cells");
}

std::string to_string(SolverKind k) { return k == SolverKind::Newton ? "newton" : "fixed-point"; }

SolverKind solver_kind_from_string(const std::string& s) {
  if (s == "fixed-point") return SolverKind::FixedPoint;
  if (s == "newton") return SolverKind::Newton;
  throw ConfigError("unknown solver '" + s + "' (expected fixed-point or newton)");
}

namespace {

using LU = Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>>;

double max_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

class Assembler {
 public:
  Assembler(const MultisymplecticSystem& sys, const Grid1D& grid, const TableauPair& tab, double dW, double dt)
      : sys_(sys), grid_(grid), tab_(tab), dW_(dW), dt_(dt) {
    grid.validate();
    validate_shapes(tab);
    if (!tab.shared_temporal_coefficients()) {
      throw ConfigError(
          "step requires identical drift and diffusion coefficients: only the combined stage increment "
          "dt*delta_t^A Z + dW*delta_t^M Z is determined when M is singular");
    }
    if (sys.M.dim() != sys.m || sys.K.dim() != sys.m || sys.Ktilde.dim() != sys.m) {
      throw StructureError("structure matrices do not match system dimension");
    }
    layout_.n_cells = grid.n_cells;
    layout_.r = tab.r();
    layout_.s = tab.s();
    layout_.m = sys.m;
    flux_ = dt * sys.K.entries() + dW * sys.Ktilde.entries();
  }

  const StageValues& layout() const { return layout_; }
  Eigen::Index size() const { return layout_.block() * layout_.n_cells; }

  void check_state(const CellField& f) const {
    if (f.n_cells != layout_.n_cells || f.stages != layout_.s || f.m != layout_.m) {
      throw StructureError("field layout does not match grid, tableau and system");
    }
  }

  // Z_{i,l} = c_l + sum_j abar_ij S_{j,l}
  Vec stages_from(const Vec& u, const CellField& c) const {
    const auto& L = layout_;
    const Mat& abar = tab_.drift.a;
    Vec Z(static_cast<Eigen::Index>(L.n_cells) * L.r * L.s * L.m);
    for (int n = 0; n < L.n_cells; ++n) {
      for (int i = 0; i < L.r; ++i) {
        for (int l = 0; l < L.s; ++l) {
          Vec z = c.at(n, l);
          for (int j = 0; j < L.r; ++j) z += abar(i, j) * u.segment(L.increment_offset(n, j, l), L.m);
          Z.segment(L.stage_offset(n, i, l), L.m) = z;
        }
      }
    }
    return Z;
  }

  Vec residual(const Vec& u, const Vec& Z) const {
    const auto& L = layout_;
    const int N = L.n_cells, m = L.m;
    const double dx = grid_.dx;
    const auto& a = tab_.spatial.a;
    const auto& b = tab_.spatial.b;
    const Mat& M = sys_.M.entries();
    Vec F(size());
    for (int n = 0; n < N; ++n) {
      const int next = (n + 1) % N;
      for (int i = 0; i < L.r; ++i) {
        const auto e = u.segment(L.edge_offset(n, i), m);
        Vec upd = u.segment(L.edge_offset(next, i), m) - e;
        for (int l = 0; l < L.s; ++l) upd -= dx * b[l] * u.segment(L.slope_offset(n, i, l), m);
        F.segment(L.edge_offset(n, i), m) = upd;

        for (int l = 0; l < L.s; ++l) {
          const Vec z = Z.segment(L.stage_offset(n, i, l), m);
          Vec st = z - e;
          for (int k = 0; k < L.s; ++k) st -= dx * a(l, k) * u.segment(L.slope_offset(n, i, k), m);
          F.segment(L.slope_offset(n, i, l), m) = st;

          F.segment(L.increment_offset(n, i, l), m) =
              M * u.segment(L.increment_offset(n, i, l), m) + flux_ * u.segment(L.slope_offset(n, i, l), m) -
              dt_ * sys_.ham.grad(z) - dW_ * sys_.ham.stoch_grad(z);
        }
      }
    }
    return F;
  }

  Mat curvature(const Vec& z) const { return dt_ * sys_.ham.hess(z) + dW_ * sys_.ham.stoch_hess(z); }

  SparseMat jacobian(const Vec& Z) const {
    const auto& L = layout_;
    const int N = L.n_cells, m = L.m;
    const double dx = grid_.dx;
    const auto& a = tab_.spatial.a;
    const auto& b = tab_.spatial.b;
    const Mat& abar = tab_.drift.a;
    const Mat& M = sys_.M.entries();

    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(size()) * (4 + 2 * m));
    auto add_identity = [&](Eigen::Index row, Eigen::Index col, double w) {
      if (w == 0.0) return;
      for (int k = 0; k < m; ++k) trip.emplace_back(row + k, col + k, w);
    };
    auto add_block = [&](Eigen::Index row, Eigen::Index col, const Mat& B) {
      for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q)
          if (B(p, q) != 0.0) trip.emplace_back(row + p, col + q, B(p, q));
    };

    for (int n = 0; n < N; ++n) {
      const int next = (n + 1) % N;
      for (int i = 0; i < L.r; ++i) {
        const auto row_e = L.edge_offset(n, i);
        add_identity(row_e, L.edge_offset(next, i), 1.0);
        add_identity(row_e, L.edge_offset(n, i), -1.0);
        for (int l = 0; l < L.s; ++l) add_identity(row_e, L.slope_offset(n, i, l), -dx * b[l]);

        for (int l = 0; l < L.s; ++l) {
          const auto row_s = L.slope_offset(n, i, l);
          for (int j = 0; j < L.r; ++j) add_identity(row_s, L.increment_offset(n, j, l), abar(i, j));
          add_identity(row_s, L.edge_offset(n, i), -1.0);
          for (int k = 0; k < L.s; ++k) add_identity(row_s, L.slope_offset(n, i, k), -dx * a(l, k));

          const auto row_d = L.increment_offset(n, i, l);
          const Mat curv = curvature(Z.segment(L.stage_offset(n, i, l), m));
          add_block(row_d, L.increment_offset(n, i, l), M);
          for (int j = 0; j < L.r; ++j) {
            if (abar(i, j) != 0.0) add_block(row_d, L.increment_offset(n, j, l), -abar(i, j) * curv);
          }
          add_block(row_d, L.slope_offset(n, i, l), flux_);
        }
      }
    }
    SparseMat J(size(), size());
    J.setFromTriplets(trip.begin(), trip.end());
    J.makeCompressed();
    return J;
  }

  // Rough start: frozen time level, edges from neighbouring stages.
  Vec initial_guess(const CellField& c) const {
    const auto& L = layout_;
    const int N = L.n_cells;
    Vec u = Vec::Zero(size());
    for (int n = 0; n < N; ++n) {
      const int prev = (n + N - 1) % N, next = (n + 1) % N;
      const Vec e = 0.5 * (c.at(prev, L.s - 1) + c.at(n, 0));
      for (int i = 0; i < L.r; ++i) {
        u.segment(L.edge_offset(n, i), L.m) = e;
        for (int l = 0; l < L.s; ++l) {
          u.segment(L.slope_offset(n, i, l), L.m) = (c.at(next, l) - c.at(n, l)) / grid_.dx;
        }
      }
    }
    return u;
  }

  // c'_l = c_l + sum_j bbar_j S_{j,l}
  void advance(const Vec& u, const CellField& c, CellField& out) const {
    const auto& L = layout_;
    const auto& bbar = tab_.drift.b;
    for (int n = 0; n < L.n_cells; ++n) {
      for (int l = 0; l < L.s; ++l) {
        Vec z = c.at(n, l);
        for (int j = 0; j < L.r; ++j) z += bbar[j] * u.segment(L.increment_offset(n, j, l), L.m);
        out.at(n, l) = z;
      }
    }
  }

  // -(dF/dc) dc
  Vec tangent_rhs(const Vec& Z, const CellField& dc) const {
    const auto& L = layout_;
    Vec rhs = Vec::Zero(size());
    for (int n = 0; n < L.n_cells; ++n) {
      for (int i = 0; i < L.r; ++i) {
        for (int l = 0; l < L.s; ++l) {
          const Vec d = dc.at(n, l);
          rhs.segment(L.slope_offset(n, i, l), L.m) = -d;
          rhs.segment(L.increment_offset(n, i, l), L.m) = curvature(Z.segment(L.stage_offset(n, i, l), L.m)) * d;
        }
      }
    }
    return rhs;
  }

 private:
  const MultisymplecticSystem& sys_;
  const Grid1D& grid_;
  const TableauPair& tab_;
  double dW_, dt_;
  Mat flux_;
  StageValues layout_;
};

void factorize(LU& lu, const SparseMat& J, double residual, int iterations) {
  lu.compute(J);
  if (lu.info() != Eigen::Success) {
    throw SolverError("singular stage Jacobian (" + lu.lastErrorMessage() + ")", residual, iterations);
  }
}

}  // namespace

StepResult step(const MultisymplecticSystem& sys, const Grid1D& grid, const FieldState& state, double dW,
                double dt, const TableauPair& tab, const SolverConfig& solver) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (!check_consistency(tab).pass) throw ConfigError("tableau '" + tab.name + "' is not consistent");
  Assembler asmb(sys, grid, tab, dW, dt);
  asmb.check_state(state);

  StepReport report;
  report.solver = solver.kind;
  report.non_symplectic_tableau = !check_symplecticity(tab).pass;

  Vec u = asmb.initial_guess(state);
  Vec Z = asmb.stages_from(u, state);
  Vec F = asmb.residual(u, Z);
  double norm = max_norm(F);
  if (!std::isfinite(norm)) throw DivergenceError("non-finite stage residual", norm, 0);

  LU lu;
  bool factored = false;
  while (true) {
    if (!std::isfinite(norm)) {
      throw DivergenceError("non-finite stage residual", norm, report.iterations);
    }
    if (report.iterations >= solver.max_iter) {
      throw SolverError("stage solve did not reach tolerance in " + std::to_string(solver.max_iter) +
                            " iterations",
                        norm, report.iterations);
    }
    if (solver.kind == SolverKind::Newton || !factored) {
      factorize(lu, asmb.jacobian(Z), norm, report.iterations);
      factored = true;
    }
    const Vec d = lu.solve(F);
    u -= d;
    ++report.iterations;
    Z = asmb.stages_from(u, state);
    norm = max_norm(d);
    if (norm <= solver.tolerance) break;
    F = asmb.residual(u, Z);
    if (!std::isfinite(max_norm(F))) norm = std::numeric_limits<double>::quiet_NaN();
  }
  report.residual_norm = norm;

  StepResult out;
  out.state = FieldState(state.n_cells, state.stages, state.m);
  out.state.t = state.t + dt;
  asmb.advance(u, state, out.state);
  out.stages = asmb.layout();
  out.stages.unknowns = std::move(u);
  out.stages.Z = std::move(Z);
  out.report = report;
  return out;
}

TangentStep step_tangent(const MultisymplecticSystem& sys, const Grid1D& grid, const StageValues& stages,
                         const TangentField& tangent, double dW, double dt, const TableauPair& tab) {
  Assembler asmb(sys, grid, tab, dW, dt);
  asmb.check_state(tangent);
  if (stages.Z.size() != static_cast<Eigen::Index>(grid.n_cells) * tab.r() * tab.s() * sys.m) {
    throw StructureError("stage values do not match grid, tableau and system");
  }
  LU lu;
  lu.compute(asmb.jacobian(stages.Z));
  if (lu.info() != Eigen::Success) {
    throw SolverError("singular linearized stage system (" + lu.lastErrorMessage() + ")",
                      std::numeric_limits<double>::quiet_NaN(), 0);
  }
  TangentStep out;
  out.stages = asmb.layout();
  out.stages.unknowns = lu.solve(asmb.tangent_rhs(stages.Z, tangent));
  out.stages.Z = asmb.stages_from(out.stages.unknowns, tangent);
  out.next = TangentField(tangent.n_cells, tangent.stages, tangent.m);
  asmb.advance(out.stages.unknowns, tangent, out.next);
  return out;
}

double stage_residual(const MultisymplecticSystem& sys, const Grid1D& grid, const FieldState& state,
                      const StageValues& stages, double dW, double dt, const TableauPair& tab) {
  Assembler asmb(sys, grid, tab, dW, dt);
  asmb.check_state(state);
  const Vec Z = asmb.stages_from(stages.unknowns, state);
  return max_norm(asmb.residual(stages.unknowns, Z));
}

}  // namespace stochms
