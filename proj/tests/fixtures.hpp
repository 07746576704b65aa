#pragma once

#include <random>

#include "stochms/collocation.hpp"
#include "stochms/nls.hpp"

namespace fixtures {

inline stochms::Grid1D grid(int n, double length = 40.0) { return {n, length / n, 0.0}; }

inline stochms::TangentField random_tangent(int n_cells, int stages, int m, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  stochms::TangentField t(n_cells, stages, m);
  for (auto& x : t.values) x = g(rng);
  return t;
}

inline stochms::FieldState random_state(int n_cells, int stages, int m, std::mt19937_64& rng, double amp = 0.5) {
  std::normal_distribution<double> g;
  stochms::FieldState s(n_cells, stages, m);
  for (auto& x : s.values) x = amp * g(rng);
  return s;
}

}  // namespace fixtures
