#include "stochms/nls_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fftw3.h>

#include <mutex>

#include "stochms/errors.hpp"

namespace stochms::kernels {

ReducedCoefficients transport_coefficients(double kappa, double xi, double dt, double dW, double dx) {
  return {0.5 * dt, 0.5 * xi * dW, 2.0 * kappa * dt, dx};
}

ReducedCoefficients dispersion_coefficients(double kappa, double epsilon, double dt, double dW, double dx) {
  return {0.5 * (dt + epsilon * dW), 0.0, 2.0 * kappa * dt, dx};
}

namespace {

struct Stencil {
  double mass[3];  // Ax^2
  double lap[3];   // dx^2
  double adv[3];   // Ax dx
};

Stencil make_stencil(double dx) {
  const double h2 = 1.0 / (dx * dx);
  const double h1 = 0.5 / dx;
  return {{0.25, 0.5, 0.25}, {h2, -2.0 * h2, h2}, {-h1, 0.0, h1}};
}

inline void cell_cubic(std::span<const double> p, std::span<const double> q, std::span<const double> next,
                       int c, int N, double& gp, double& gq) {
  const int c1 = c + 1 < N ? c + 1 : 0;
  const double yp = 0.25 * ((p[c] + p[c1]) + (next[2 * c] + next[2 * c1]));
  const double yq = 0.25 * ((q[c] + q[c1]) + (next[2 * c + 1] + next[2 * c1 + 1]));
  const double rho = yp * yp + yq * yq;
  gp = rho * yp;
  gq = rho * yq;
}

// Equation n, given the cubic of cells n and n+1.
inline void residual_at(const ReducedCoefficients& co, const Stencil& st, std::span<const double> p,
                        std::span<const double> q, std::span<const double> next, const double* g0,
                        const double* g1, int n, int N, double* out) {
  const int idx[3] = {n, n + 1 < N ? n + 1 : n + 1 - N, n + 2 < N ? n + 2 : n + 2 - N};
  double rp = 0.0, rq = 0.0;
  for (int j = 0; j < 3; ++j) {
    const int k = idx[j];
    const double pn = next[2 * k], qn = next[2 * k + 1];
    rp += st.mass[j] * (pn - p[k]) + co.sigma * st.lap[j] * (qn + q[k]) + co.tau * st.adv[j] * (pn + p[k]);
    rq += st.mass[j] * (qn - q[k]) - co.sigma * st.lap[j] * (pn + p[k]) + co.tau * st.adv[j] * (qn + q[k]);
  }
  out[0] = rp - co.nu * 0.5 * (g0[1] + g1[1]);
  out[1] = rq + co.nu * 0.5 * (g0[0] + g1[0]);
}

void check_sizes(std::span<const double> p, std::span<const double> q, std::span<const double> next,
                 std::size_t out_size) {
  const auto N = p.size();
  if (q.size() != N || next.size() != 2 * N || out_size != 2 * N) {
    throw StructureError("reduced kernel: inconsistent array sizes");
  }
  if (N < 3) throw StructureError("reduced kernel needs at least 3 nodes");
}

}  // namespace

void reduced_residual(Mode mode, const ReducedCoefficients& c, std::span<const double> p,
                      std::span<const double> q, std::span<const double> next, std::span<double> out) {
  check_sizes(p, q, next, out.size());
  const int N = static_cast<int>(p.size());
  const Stencil st = make_stencil(c.dx);
  std::vector<double> g(2 * static_cast<std::size_t>(N));  // (gp, gq) per cell
  auto node = [&](int n) {
    const int n1 = n + 1 < N ? n + 1 : 0;
    residual_at(c, st, p, q, next, &g[2 * n], &g[2 * n1], n, N, &out[2 * n]);
  };
  if (mode == Mode::Parallel) {
#pragma omp parallel
    {
#pragma omp for schedule(static)
      for (int n = 0; n < N; ++n) cell_cubic(p, q, next, n, N, g[2 * n], g[2 * n + 1]);
#pragma omp for schedule(static)
      for (int n = 0; n < N; ++n) node(n);
    }
  } else {
    for (int n = 0; n < N; ++n) cell_cubic(p, q, next, n, N, g[2 * n], g[2 * n + 1]);
    for (int n = 0; n < N; ++n) node(n);
  }
}

void cubic_term(Mode mode, std::span<const double> p, std::span<const double> q, std::span<const double> next,
                std::span<double> gp, std::span<double> gq) {
  check_sizes(p, q, next, 2 * gp.size());
  const int N = static_cast<int>(p.size());
  if (mode == Mode::Parallel) {
#pragma omp parallel for schedule(static)
    for (int c = 0; c < N; ++c) cell_cubic(p, q, next, c, N, gp[c], gq[c]);
  } else {
    for (int c = 0; c < N; ++c) cell_cubic(p, q, next, c, N, gp[c], gq[c]);
  }
}

SparseMat reduced_jacobian(const ReducedCoefficients& c, std::span<const double> p, std::span<const double> q,
                           std::span<const double> next, bool include_cubic) {
  check_sizes(p, q, next, next.size());
  const int N = static_cast<int>(p.size());
  const Stencil st = make_stencil(c.dx);
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(N) * (include_cubic ? 28 : 12));
  for (int n = 0; n < N; ++n) {
    for (int j = 0; j < 3; ++j) {
      const int k = (n + j) % N;
      const double diag = st.mass[j] + c.tau * st.adv[j];
      trip.emplace_back(2 * n, 2 * k, diag);
      trip.emplace_back(2 * n, 2 * k + 1, c.sigma * st.lap[j]);
      trip.emplace_back(2 * n + 1, 2 * k + 1, diag);
      trip.emplace_back(2 * n + 1, 2 * k, -c.sigma * st.lap[j]);
    }
    if (!include_cubic || c.nu == 0.0) continue;
    // N[n] = (g_n + g_{n+1}) / 2 and Y_c depends on nodes c, c+1 with weight 1/4.
    for (int cell = n; cell <= n + 1; ++cell) {
      const int cc = cell % N;
      const int c1 = (cc + 1) % N;
      const double yp = 0.25 * ((p[cc] + p[c1]) + (next[2 * cc] + next[2 * c1]));
      const double yq = 0.25 * ((q[cc] + q[c1]) + (next[2 * cc + 1] + next[2 * c1 + 1]));
      const double dgp_dp = 3.0 * yp * yp + yq * yq;
      const double dgp_dq = 2.0 * yp * yq;
      const double dgq_dq = yp * yp + 3.0 * yq * yq;
      const double w = 0.125 * c.nu;
      for (int node : {cc, c1}) {
        trip.emplace_back(2 * n, 2 * node, -w * dgp_dq);
        trip.emplace_back(2 * n, 2 * node + 1, -w * dgq_dq);
        trip.emplace_back(2 * n + 1, 2 * node, w * dgp_dp);
        trip.emplace_back(2 * n + 1, 2 * node + 1, w * dgp_dq);
      }
    }
  }
  SparseMat J(2 * N, 2 * N);
  J.setFromTriplets(trip.begin(), trip.end());
  J.makeCompressed();
  return J;
}

namespace {

// The FFTW planner is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct CirculantSolver::Plan {
  explicit Plan(int n) : n(n) {
    buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(n)));
    std::lock_guard lock(planner_mutex());
    fwd = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    inv = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(buf);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  int n;
  fftw_complex* buf;
  fftw_plan fwd;
  fftw_plan inv;
};

CirculantSolver::CirculantSolver(const ReducedCoefficients& c, int n_nodes)
    : n_(n_nodes) {
  if (n_nodes < 3) throw StructureError("reduced kernel needs at least 3 nodes");
  plan_ = std::make_unique<Plan>(n_);
  const Stencil st = make_stencil(c.dx);
  inverse_symbol_.resize(n_);
  for (int k = 0; k < n_; ++k) {
    std::complex<double> sym{};
    for (int j = 0; j < 3; ++j) {
      const auto e = std::polar(1.0, 2.0 * std::numbers::pi * k * j / n_);
      sym += (std::complex<double>(st.mass[j] + c.tau * st.adv[j], -c.sigma * st.lap[j])) * e;
    }
    // the unnormalised inverse transform scales by n
    inverse_symbol_[k] = 1.0 / (sym * static_cast<double>(n_));
  }
}

CirculantSolver::~CirculantSolver() = default;

void CirculantSolver::solve(std::span<const double> r, std::span<double> d) const {
  if (r.size() != 2 * static_cast<std::size_t>(n_) || d.size() != r.size()) {
    throw StructureError("circulant solve: inconsistent array sizes");
  }
  auto& P = *plan_;
  for (int n = 0; n < n_; ++n) {
    P.buf[n][0] = r[2 * n];
    P.buf[n][1] = r[2 * n + 1];
  }
  fftw_execute(P.fwd);
  for (int k = 0; k < n_; ++k) {
    const std::complex<double> v = std::complex<double>(P.buf[k][0], P.buf[k][1]) * inverse_symbol_[k];
    P.buf[k][0] = v.real();
    P.buf[k][1] = v.imag();
  }
  fftw_execute(P.inv);
  for (int n = 0; n < n_; ++n) {
    d[2 * n] = P.buf[n][0];
    d[2 * n + 1] = P.buf[n][1];
  }
}

double max_abs(Mode mode, std::span<const double> v) {
  const auto n = static_cast<long>(v.size());
  double m = 0.0;
  if (mode == Mode::Parallel) {
#pragma omp parallel for reduction(max : m) schedule(static)
    for (long i = 0; i < n; ++i) m = std::max(m, std::abs(v[i]));
  } else {
    for (long i = 0; i < n; ++i) m = std::max(m, std::abs(v[i]));
  }
  // NaN does not win a max comparison; report it explicitly.
  for (long i = 0; i < n; ++i) {
    if (!std::isfinite(v[i])) return std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

}  // namespace stochms::kernels
