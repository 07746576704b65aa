#include "stochms/system.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "stochms/errors.hpp"

namespace stochms {

SkewMatrix SkewMatrix::from_lower(const Mat& generator) {
  if (generator.rows() != generator.cols()) {
    throw StructureError("skew generator must be square");
  }
  Mat lower = generator.triangularView<Eigen::StrictlyLower>();
  return SkewMatrix(lower - lower.transpose());
}

SkewMatrix SkewMatrix::zero(int dim) { return SkewMatrix(Mat::Zero(dim, dim)); }

SkewMatrix SkewMatrix::unchecked(Mat entries) { return SkewMatrix(std::move(entries)); }

SkewMatrix SkewMatrix::scaled(double s) const { return SkewMatrix(s * entries_); }

double SkewMatrix::skew_residual() const {
  if (entries_.size() == 0) return 0.0;
  return (entries_ + entries_.transpose()).cwiseAbs().maxCoeff();
}

namespace {

double max_abs(const Mat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

// max |approx - exact| / max(1, max |exact|)
double relative_gap(const Mat& approx, const Mat& exact) {
  return max_abs(approx - exact) / std::max(1.0, max_abs(exact));
}

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& z, double h) {
  Vec g(z.size());
  for (Eigen::Index a = 0; a < z.size(); ++a) {
    Vec zp = z, zm = z;
    zp[a] += h;
    zm[a] -= h;
    g[a] = (f(zp) - f(zm)) / (2.0 * h);
  }
  return g;
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& z, double h) {
  const auto n = z.size();
  Mat j(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    Vec zp = z, zm = z;
    zp[a] += h;
    zm[a] -= h;
    j.col(a) = (f(zp) - f(zm)) / (2.0 * h);
  }
  return j;
}

}  // namespace

StructureReport validate_system(const MultisymplecticSystem& sys, const ValidationOptions& opts) {
  const int m = sys.m;
  if (m <= 0) throw StructureError("system dimension must be positive");
  if (sys.M.dim() != m || sys.K.dim() != m || sys.Ktilde.dim() != m) {
    throw StructureError("structure matrices do not match system dimension " + std::to_string(m));
  }
  const auto& h = sys.ham;
  if (!h.value || !h.stoch_value || !h.grad || !h.stoch_grad || !h.hess || !h.stoch_hess) {
    throw StructureError("Hamiltonian pair is incomplete");
  }
  {
    const Vec z0 = Vec::Zero(m);
    if (h.grad(z0).size() != m || h.stoch_grad(z0).size() != m || h.hess(z0).rows() != m ||
        h.hess(z0).cols() != m || h.stoch_hess(z0).rows() != m || h.stoch_hess(z0).cols() != m) {
      throw StructureError("Hamiltonian derivatives do not match system dimension");
    }
  }

  StructureReport r;
  r.skew_residual = std::max({sys.M.skew_residual(), sys.K.skew_residual(), sys.Ktilde.skew_residual()});

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unif(-opts.sample_radius, opts.sample_radius);
  for (int k = 0; k < opts.samples; ++k) {
    Vec z(m);
    for (int a = 0; a < m; ++a) z[a] = unif(rng);

    const Mat hz = h.hess(z);
    const Mat hsz = h.stoch_hess(z);
    r.hessian_symmetry_residual = std::max(
        {r.hessian_symmetry_residual, max_abs(hz - hz.transpose()), max_abs(hsz - hsz.transpose())});

    r.grad_fd_residual = std::max({r.grad_fd_residual,
                                   relative_gap(fd_gradient(h.value, z, opts.fd_step), h.grad(z)),
                                   relative_gap(fd_gradient(h.stoch_value, z, opts.fd_step), h.stoch_grad(z))});
    r.hess_fd_residual = std::max({r.hess_fd_residual,
                                   relative_gap(fd_jacobian(h.grad, z, opts.fd_step), hz),
                                   relative_gap(fd_jacobian(h.stoch_grad, z, opts.fd_step), hsz)});
  }

  r.pass = r.skew_residual <= opts.exact_tol && r.hessian_symmetry_residual <= opts.exact_tol &&
           r.grad_fd_residual <= opts.fd_tol && r.hess_fd_residual <= opts.fd_tol;
  return r;
}

namespace {

constexpr int kNlsDim = 4;

SkewMatrix nls_time_matrix() {
  Mat g = Mat::Zero(kNlsDim, kNlsDim);
  g(1, 0) = -1.0;  // M(0,1) = 1
  return SkewMatrix::from_lower(g);
}

SkewMatrix nls_space_matrix() {
  Mat g = Mat::Zero(kNlsDim, kNlsDim);
  g(2, 0) = 1.0;  // K(0,2) = -1
  g(3, 1) = 1.0;  // K(1,3) = -1
  return SkewMatrix::from_lower(g);
}

// H(z) = -(1/2)(kappa (p^2+q^2)^2 - v^2 - w^2)
HamiltonianPair nls_hamiltonian(double kappa) {
  HamiltonianPair h;
  h.value = [kappa](const Vec& z) {
    const double rho = z[0] * z[0] + z[1] * z[1];
    return -0.5 * (kappa * rho * rho - z[2] * z[2] - z[3] * z[3]);
  };
  h.grad = [kappa](const Vec& z) {
    const double rho = z[0] * z[0] + z[1] * z[1];
    Vec g(kNlsDim);
    g << -2.0 * kappa * rho * z[0], -2.0 * kappa * rho * z[1], z[2], z[3];
    return g;
  };
  h.hess = [kappa](const Vec& z) {
    const double p = z[0], q = z[1];
    Mat m = Mat::Zero(kNlsDim, kNlsDim);
    m(0, 0) = -2.0 * kappa * (3.0 * p * p + q * q);
    m(1, 1) = -2.0 * kappa * (p * p + 3.0 * q * q);
    m(0, 1) = m(1, 0) = -4.0 * kappa * p * q;
    m(2, 2) = 1.0;
    m(3, 3) = 1.0;
    return m;
  };
  if (kappa == 0.0) {
    Mat a = Mat::Zero(kNlsDim, kNlsDim);
    a(2, 2) = a(3, 3) = 0.5;
    h.quad_A = a;
  }
  return h;
}

void set_zero_stochastic_part(HamiltonianPair& h) {
  h.stoch_value = [](const Vec&) { return 0.0; };
  h.stoch_grad = [](const Vec&) { return Vec(Vec::Zero(kNlsDim)); };
  h.stoch_hess = [](const Vec&) { return Mat(Mat::Zero(kNlsDim, kNlsDim)); };
  h.quad_Atilde = Mat::Zero(kNlsDim, kNlsDim);
}

}  // namespace

MultisymplecticSystem nls_transport_system(double kappa, double xi) {
  MultisymplecticSystem sys;
  sys.m = kNlsDim;
  sys.M = nls_time_matrix();
  sys.K = nls_space_matrix();
  sys.Ktilde = sys.M.scaled(xi);
  sys.ham = nls_hamiltonian(kappa);
  set_zero_stochastic_part(sys.ham);
  sys.label = "nls-transport";
  return sys;
}

MultisymplecticSystem nls_dispersion_system(double kappa, double epsilon) {
  MultisymplecticSystem sys;
  sys.m = kNlsDim;
  sys.M = nls_time_matrix();
  sys.K = nls_space_matrix();
  sys.Ktilde = sys.K.scaled(epsilon);
  sys.ham = nls_hamiltonian(kappa);
  // Htilde = (epsilon/2)(v^2 + w^2)
  sys.ham.stoch_value = [epsilon](const Vec& z) { return 0.5 * epsilon * (z[2] * z[2] + z[3] * z[3]); };
  sys.ham.stoch_grad = [epsilon](const Vec& z) {
    Vec g(kNlsDim);
    g << 0.0, 0.0, epsilon * z[2], epsilon * z[3];
    return g;
  };
  sys.ham.stoch_hess = [epsilon](const Vec&) {
    Mat m = Mat::Zero(kNlsDim, kNlsDim);
    m(2, 2) = m(3, 3) = epsilon;
    return m;
  };
  Mat at = Mat::Zero(kNlsDim, kNlsDim);
  at(2, 2) = at(3, 3) = 0.5 * epsilon;
  sys.ham.quad_Atilde = at;
  sys.label = "nls-dispersion";
  return sys;
}

MultisymplecticSystem nls_deterministic_system(double kappa) {
  auto sys = nls_transport_system(kappa, 0.0);
  sys.label = "nls-deterministic";
  return sys;
}

MultisymplecticSystem system_by_name(const std::string& name, double kappa, double noise) {
  if (name == "nls-transport") return nls_transport_system(kappa, noise);
  if (name == "nls-dispersion") return nls_dispersion_system(kappa, noise);
  if (name == "nls-deterministic") return nls_deterministic_system(kappa);
  throw ConfigError("unknown model '" + name + "'");
}

}  // namespace stochms
