#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "stochms/errors.hpp"
#include "stochms/nls.hpp"

using namespace stochms;

namespace {

FieldState plane_wave_cells(const Grid1D& g, double k) {
  PsiField psi;
  psi.p.resize(g.n_cells);
  psi.q.resize(g.n_cells);
  for (int n = 0; n < g.n_cells; ++n) {
    psi.p[n] = std::cos(k * g.node(n));
    psi.q[n] = std::sin(k * g.node(n));
  }
  return to_cell_state(psi, g);
}

}  // namespace

TEST_CASE("linear plane wave rotates by the box-scheme phase") {
  // i psi_t + psi_xx = 0: the midpoint box scheme maps e^{ikx} to e^{-i theta} e^{ikx}
  // with theta = 2 atan(dt lambda / 2), lambda = (2/dx)^2 tan^2(k dx / 2).
  const auto g = fixtures::grid(32, 2.0 * M_PI);
  const double k = 3.0, dt = 0.05;
  const auto sys = nls_deterministic_system(0.0);
  const auto start = plane_wave_cells(g, k);
  const auto res = step(sys, g, start, 0.0, dt, midpoint_tableau(), {SolverKind::Newton, 1e-13, 20});

  const double t = std::tan(k * g.dx / 2.0);
  const double theta = 2.0 * std::atan(dt * (4.0 / (g.dx * g.dx)) * t * t / 2.0);
  for (int n = 0; n < g.n_cells; ++n) {
    const std::complex<double> before(start.at(n)[0], start.at(n)[1]);
    const std::complex<double> after(res.state.at(n)[0], res.state.at(n)[1]);
    const auto ratio = after / before;
    CHECK(std::abs(ratio) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::arg(ratio) == doctest::Approx(-theta).epsilon(1e-11));
  }
}

TEST_CASE("converged stages satisfy the stage equations") {
  std::mt19937_64 rng(5);
  const auto g = fixtures::grid(16);
  const auto sys = nls_transport_system(-1.0, 0.1);
  const auto s0 = fixtures::random_state(16, 1, 4, rng);
  const auto res = step(sys, g, s0, 0.07, 0.02, midpoint_tableau(), {SolverKind::FixedPoint, 1e-11, 100});
  CHECK(res.report.iterations > 0);
  CHECK(res.report.residual_norm <= 1e-11);
  CHECK(stage_residual(sys, g, s0, res.stages, 0.07, 0.02, midpoint_tableau()) <= 1e-11);
}

TEST_CASE("fixed point and Newton agree") {
  std::mt19937_64 rng(9);
  const auto g = fixtures::grid(20);
  const auto sys = nls_dispersion_system(-1.0, 0.1);
  const auto s0 = fixtures::random_state(20, 1, 4, rng);
  const auto a = step(sys, g, s0, -0.1, 0.02, midpoint_tableau(), {SolverKind::FixedPoint, 1e-12, 200});
  const auto b = step(sys, g, s0, -0.1, 0.02, midpoint_tableau(), {SolverKind::Newton, 1e-12, 50});
  CHECK((a.state.values - b.state.values).lpNorm<Eigen::Infinity>() <= 1e-10);
  CHECK(b.report.iterations <= a.report.iterations);
  CHECK(b.report.solver == SolverKind::Newton);
}

TEST_CASE("solver reports failure with the last residual") {
  std::mt19937_64 rng(2);
  const auto g = fixtures::grid(16);
  const auto sys = nls_transport_system(-1.0, 0.1);
  const auto s0 = fixtures::random_state(16, 1, 4, rng);
  try {
    step(sys, g, s0, 0.1, 0.02, midpoint_tableau(), {SolverKind::FixedPoint, 1e-14, 1});
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.iterations() == 1);
    CHECK(e.last_residual() > 1e-14);
    CHECK(std::isfinite(e.last_residual()));
  }
  auto bad = s0;
  bad.values[3] = std::nan("");
  CHECK_THROWS_AS(step(sys, g, bad, 0.1, 0.02, midpoint_tableau()), DivergenceError);
}

TEST_CASE("step arguments are validated") {
  const auto g = fixtures::grid(16);
  const auto sys = nls_transport_system(0.0, 0.1);
  FieldState s0(16, 1, 4);
  CHECK_THROWS_AS(step(sys, g, s0, 0.0, -0.1, midpoint_tableau()), ConfigError);
  CHECK_THROWS_AS(step(sys, g, FieldState(15, 1, 4), 0.0, 0.1, midpoint_tableau()), StructureError);
  auto tab = midpoint_tableau();
  tab.diffusion.a(0, 0) = 0.25;
  tab.diffusion.c[0] = 0.25;
  CHECK_THROWS_AS(step(sys, g, s0, 0.0, 0.1, tab), ConfigError);
  CHECK_THROWS_AS(step(sys, Grid1D{2, 0.1, 0.0}, s0, 0.0, 0.1, midpoint_tableau()), ConfigError);
}

TEST_CASE("zero field is a fixed point") {
  const auto g = fixtures::grid(12);
  const auto sys = nls_dispersion_system(-1.0, 0.1);
  FieldState s0(12, 1, 4);
  const auto res = step(sys, g, s0, 0.3, 0.02, midpoint_tableau());
  CHECK(res.state.values.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("tangent matches central differences of the step") {
  std::mt19937_64 rng(17);
  const auto g = fixtures::grid(16);
  const auto tab = midpoint_tableau();
  const SolverConfig tight{SolverKind::Newton, 1e-14, 50};
  for (const auto& sys : {nls_transport_system(-1.0, 0.1), nls_dispersion_system(-1.0, 0.1)}) {
    const auto s0 = fixtures::random_state(16, 1, 4, rng);
    const auto dc = fixtures::random_tangent(16, 1, 4, rng);
    const double dW = 0.08, dt = 0.02;
    const auto base = step(sys, g, s0, dW, dt, tab, tight);
    const auto tan = step_tangent(sys, g, base.stages, dc, dW, dt, tab);

    auto fd = [&](double h) {
      auto plus = s0, minus = s0;
      plus.values += h * dc.values;
      minus.values -= h * dc.values;
      const auto a = step(sys, g, plus, dW, dt, tab, tight);
      const auto b = step(sys, g, minus, dW, dt, tab, tight);
      return Vec((a.state.values - b.state.values) / (2.0 * h));
    };
    const double e1 = (fd(1e-3) - tan.next.values).lpNorm<Eigen::Infinity>();
    const double e2 = (fd(5e-4) - tan.next.values).lpNorm<Eigen::Infinity>();
    CHECK(e1 < 1e-4);
    // second-order: halving h quarters the error
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
  }
}

TEST_CASE("tangent of a linear step is the step itself") {
  std::mt19937_64 rng(23);
  const auto g = fixtures::grid(16);
  const auto sys = nls_dispersion_system(0.0, 0.2);
  const auto s0 = fixtures::random_state(16, 1, 4, rng);
  const auto base = step(sys, g, s0, 0.1, 0.02, midpoint_tableau(), {SolverKind::Newton, 1e-13, 20});
  TangentField dc(16, 1, 4);
  dc.values = s0.values;
  const auto tan = step_tangent(sys, g, base.stages, dc, 0.1, 0.02, midpoint_tableau());
  CHECK((tan.next.values - base.state.values).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("two-stage Gauss tableau steps") {
  std::mt19937_64 rng(4);
  const auto g = fixtures::grid(12);
  const auto sys = nls_transport_system(-1.0, 0.1);
  const auto s0 = fixtures::random_state(12, 2, 4, rng, 0.2);
  const auto res = step(sys, g, s0, 0.05, 0.02, gauss2_tableau(), {SolverKind::Newton, 1e-12, 50});
  CHECK(res.report.residual_norm <= 1e-12);
  CHECK_FALSE(res.report.non_symplectic_tableau);
}

TEST_CASE("non-symplectic tableau is flagged but stepped") {
  std::mt19937_64 rng(4);
  const auto g = fixtures::grid(12);
  const auto sys = nls_transport_system(0.0, 0.1);
  const auto s0 = fixtures::random_state(12, 1, 4, rng);
  const auto res = step(sys, g, s0, 0.05, 0.02, explicit_euler_tableau(), {SolverKind::Newton, 1e-12, 50});
  CHECK(res.report.non_symplectic_tableau);
}
