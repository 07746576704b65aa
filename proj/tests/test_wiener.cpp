#include <cmath>
#include <vector>

#include "doctest.h"
#include "stochms/errors.hpp"
#include "stochms/wiener.hpp"

using namespace stochms;

TEST_CASE("truncation bound") {
  CHECK(truncation_bound(0.02, 1.0) == doctest::Approx(2.79714962253653712503).epsilon(1e-15));
  CHECK(truncation_bound(0.01, 2.0) == doctest::Approx(std::sqrt(4.0 * std::log(100.0))));
  CHECK_THROWS_AS(truncation_bound(1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(truncation_bound(0.0, 1.0), ConfigError);
}

TEST_CASE("clamp has three cases") {
  CHECK(clamp_increment(0.5, 1.0) == 0.5);
  CHECK(clamp_increment(3.0, 1.0) == 1.0);
  CHECK(clamp_increment(-3.0, 1.0) == -1.0);
}

TEST_CASE("paths are reproducible and seed dependent") {
  const auto a = sample_path(7, 0.02, 100);
  const auto b = sample_path(7, 0.02, 100);
  const auto c = sample_path(8, 0.02, 100);
  CHECK(a.raw == b.raw);
  CHECK(a.raw != c.raw);
  CHECK(standard_normal(7, 3) == standard_normal(7, 3));
}

TEST_CASE("truncated increments stay inside the bound") {
  const auto p = sample_path(1, 0.02, 5000);
  for (int k = 0; k < p.steps; ++k) {
    CHECK(std::abs(p.truncated[k]) <= p.bound);
    if (!p.clamped(k)) CHECK(p.truncated[k] == p.raw[k]);
  }
}

TEST_CASE("increment moments") {
  std::vector<WienerPath> paths;
  for (std::uint64_t s = 0; s < 20; ++s) paths.push_back(sample_path(s, 0.01, 1000));
  const auto st = sample_statistics(paths);
  CHECK(st.count == 20000);
  // mean of N(0, 0.01) over 20000 draws: sd 7.1e-4
  CHECK(std::abs(st.mean) < 5 * 7.1e-4);
  // sample variance sd ~ 0.01 * sqrt(2 / 20000)
  CHECK(std::abs(st.variance - 0.01) < 5 * 0.01 * std::sqrt(2.0 / 20000));
}

TEST_CASE("single increment statistics are degenerate") {
  std::vector<WienerPath> paths{sample_path(3, 0.1, 1)};
  const auto st = sample_statistics(paths);
  CHECK(st.degenerate);
  CHECK(st.variance == 0.0);
}

TEST_CASE("coarsening sums raw increments") {
  const auto fine = sample_path(11, 0.005, 40);
  const auto coarse = coarsen(fine, 4);
  CHECK(coarse.steps == 10);
  CHECK(coarse.dt == doctest::Approx(0.02));
  for (int k = 0; k < coarse.steps; ++k) {
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) sum += fine.raw[4 * k + j];
    CHECK(coarse.raw[k] == sum);
    CHECK(coarse.truncated[k] == clamp_increment(sum, truncation_bound(0.02, 1.0)));
  }
  CHECK(coarse.total_raw() == doctest::Approx(fine.total_raw()).epsilon(1e-14));
  CHECK_THROWS_AS(coarsen(fine, 3), ConfigError);
}
