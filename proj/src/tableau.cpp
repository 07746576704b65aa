#include "stochms/tableau.hpp"

#include <algorithm>
#include <cmath>

#include "stochms/errors.hpp"

namespace stochms {

namespace {

double max_abs(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

void check_tableau_shape(const ButcherTableau& t, const char* what) {
  const auto n = t.b.size();
  if (n == 0) throw StructureError(std::string(what) + " tableau has zero stages");
  if (t.a.rows() != n || t.a.cols() != n || t.c.size() != n) {
    throw StructureError(std::string(what) + " tableau has inconsistent shapes");
  }
}

// max over (i,j) of |x_i y_j - A_ji w_j - x_i B_ij|
double symplectic_family(const Vec& x, const Vec& y, const Mat& A, const Vec& w, const Mat& B) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      worst = std::max(worst, std::abs(x[i] * y[j] - A(j, i) * w[j] - x[i] * B(i, j)));
    }
  }
  return worst;
}

ButcherTableau one_stage(double a, double b, double c) {
  ButcherTableau t;
  t.a = Mat::Constant(1, 1, a);
  t.b = Vec::Constant(1, b);
  t.c = Vec::Constant(1, c);
  return t;
}

}  // namespace

bool TableauPair::shared_temporal_coefficients() const {
  return drift.a == diffusion.a && drift.b == diffusion.b && drift.c == diffusion.c;
}

void validate_shapes(const TableauPair& tab) {
  check_tableau_shape(tab.spatial, "spatial");
  check_tableau_shape(tab.drift, "drift");
  check_tableau_shape(tab.diffusion, "diffusion");
  if (tab.drift.stages() != tab.diffusion.stages()) {
    throw StructureError("drift and diffusion tableaux differ in stage count");
  }
}

ConsistencyReport check_consistency(const TableauPair& tab, double tol) {
  validate_shapes(tab);
  ConsistencyReport r;
  r.spatial_row_sum = max_abs(tab.spatial.c - tab.spatial.a.rowwise().sum());
  r.drift_row_sum = max_abs(tab.drift.c - tab.drift.a.rowwise().sum());
  r.diffusion_row_sum = max_abs(tab.drift.c - tab.diffusion.a.rowwise().sum());
  r.abscissa_mismatch = max_abs(tab.drift.c - tab.diffusion.c);
  r.spatial_weights = std::abs(tab.spatial.b.sum() - 1.0);
  r.drift_weights = std::abs(tab.drift.b.sum() - 1.0);
  r.diffusion_weights = std::abs(tab.diffusion.b.sum() - 1.0);
  r.max_residual = std::max({r.spatial_row_sum, r.drift_row_sum, r.diffusion_row_sum, r.abscissa_mismatch,
                             r.spatial_weights, r.drift_weights, r.diffusion_weights});
  r.pass = r.max_residual <= tol;
  return r;
}

SymplecticityReport check_symplecticity(const TableauPair& tab, double tol) {
  validate_shapes(tab);
  const auto& sp = tab.spatial;
  const auto& ab = tab.drift;
  const auto& al = tab.diffusion;
  SymplecticityReport r;
  r.spatial = symplectic_family(sp.b, sp.b, sp.a, sp.b, sp.a);
  r.drift_drift = symplectic_family(ab.b, ab.b, ab.a, ab.b, ab.a);
  r.diffusion_diffusion = symplectic_family(al.b, al.b, al.a, al.b, al.a);
  // bbar_i betabar_j - alphabar_ji bbar_j - bbar_i alphabar_ij
  r.drift_diffusion = symplectic_family(ab.b, al.b, al.a, ab.b, al.a);
  // betabar_i bbar_j - abar_ji betabar_j - betabar_i abar_ij
  r.diffusion_drift = symplectic_family(al.b, ab.b, ab.a, al.b, ab.a);
  r.max_residual =
      std::max({r.spatial, r.drift_drift, r.diffusion_diffusion, r.drift_diffusion, r.diffusion_drift});
  r.pass = r.max_residual <= tol;
  return r;
}

TableauPair midpoint_tableau() {
  TableauPair t;
  t.spatial = one_stage(0.5, 1.0, 0.5);
  t.drift = one_stage(0.5, 1.0, 0.5);
  t.diffusion = one_stage(0.5, 1.0, 0.5);
  t.name = "midpoint";
  return t;
}

TableauPair gauss2_tableau() {
  const double r3 = std::sqrt(3.0);
  ButcherTableau g;
  g.a.resize(2, 2);
  g.a << 0.25, 0.25 - r3 / 6.0, 0.25 + r3 / 6.0, 0.25;
  g.b.resize(2);
  g.b << 0.5, 0.5;
  g.c.resize(2);
  g.c << 0.5 - r3 / 6.0, 0.5 + r3 / 6.0;
  TableauPair t;
  t.spatial = g;
  t.drift = g;
  t.diffusion = g;
  t.name = "gauss2";
  return t;
}

TableauPair explicit_euler_tableau() {
  TableauPair t = midpoint_tableau();
  t.spatial = one_stage(0.0, 1.0, 0.0);
  t.name = "explicit-euler";
  return t;
}

TableauPair tableau_by_name(const std::string& name) {
  if (name == "midpoint") return midpoint_tableau();
  if (name == "gauss2") return gauss2_tableau();
  if (name == "explicit-euler") return explicit_euler_tableau();
  throw ConfigError("unknown tableau '" + name + "'");
}

}  // namespace stochms
