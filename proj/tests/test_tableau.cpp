#include "doctest.h"
#include "stochms/errors.hpp"
#include "stochms/tableau.hpp"

using namespace stochms;

TEST_CASE("midpoint tableau is consistent and symplectic") {
  const auto tab = midpoint_tableau();
  CHECK(tab.s() == 1);
  CHECK(tab.r() == 1);
  const auto cons = check_consistency(tab);
  CHECK(cons.pass);
  CHECK(cons.max_residual <= 1e-14);
  const auto sym = check_symplecticity(tab);
  CHECK(sym.pass);
  CHECK(sym.max_residual <= 1e-14);
}

TEST_CASE("Gauss-Legendre two-stage abscissae") {
  const auto tab = gauss2_tableau();
  CHECK(tab.spatial.c[0] == doctest::Approx(0.2113248654051871).epsilon(1e-15));
  CHECK(tab.spatial.c[1] == doctest::Approx(0.7886751345948129).epsilon(1e-15));
  CHECK(check_consistency(tab).pass);
  CHECK(check_symplecticity(tab).pass);
}

TEST_CASE("explicit Euler in space is consistent but not symplectic") {
  const auto tab = explicit_euler_tableau();
  CHECK(check_consistency(tab).pass);
  const auto sym = check_symplecticity(tab);
  CHECK_FALSE(sym.pass);
  // b b - a b - b a = 1 with a = 0, b = 1
  CHECK(sym.spatial == doctest::Approx(1.0));
}

TEST_CASE("perturbed weights break consistency") {
  auto tab = midpoint_tableau();
  tab.drift.b[0] = 1.0 + 1e-10;
  const auto cons = check_consistency(tab);
  CHECK_FALSE(cons.pass);
  CHECK(cons.drift_weights == doctest::Approx(1e-10).epsilon(1e-3));
}

TEST_CASE("mismatched shapes are rejected") {
  auto tab = midpoint_tableau();
  tab.spatial.b = Vec::Ones(2);
  CHECK_THROWS_AS(validate_shapes(tab), StructureError);
}

TEST_CASE("tableau lookup by name") {
  CHECK(tableau_by_name("midpoint").name == "midpoint");
  CHECK(tableau_by_name("explicit-euler").s() == 1);
  CHECK_THROWS_AS(tableau_by_name("rk4"), ConfigError);
}
