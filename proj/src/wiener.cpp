#include "stochms/wiener.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numeric>

#include "stochms/errors.hpp"

namespace stochms {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

double WienerPath::total_raw() const { return std::accumulate(raw.begin(), raw.end(), 0.0); }

double truncation_bound(double dt, double truncation_k) {
  if (!(dt > 0.0) || dt >= 1.0) {
    throw ConfigError("truncation bound needs 0 < dt < 1 (got dt = " + std::to_string(dt) + ")");
  }
  if (!(truncation_k >= 1.0)) throw ConfigError("truncation_k must be >= 1");
  return std::sqrt(2.0 * truncation_k * std::abs(std::log(dt)));
}

double clamp_increment(double dw, double bound) {
  if (dw > bound) return bound;
  if (dw < -bound) return -bound;
  return dw;
}

double standard_normal(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t word = splitmix64(seed * 0x9E3779B97F4A7C15ULL + counter + 1);
  const double u = (static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53;
  // Phi^{-1}(u) = -sqrt(2) erfc^{-1}(2u)
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

WienerPath sample_path(std::uint64_t seed, double dt, int steps, double truncation_k) {
  if (steps < 1) throw ConfigError("path needs at least one step");
  WienerPath path;
  path.seed = seed;
  path.dt = dt;
  path.steps = steps;
  path.bound = truncation_bound(dt, truncation_k);
  path.raw.resize(steps);
  path.truncated.resize(steps);
  const double sigma = std::sqrt(dt);
  for (int k = 0; k < steps; ++k) {
    path.raw[k] = sigma * standard_normal(seed, static_cast<std::uint64_t>(k));
    path.truncated[k] = clamp_increment(path.raw[k], path.bound);
  }
  return path;
}

WienerPath coarsen(const WienerPath& path, int factor, double truncation_k) {
  if (factor < 1 || path.steps % factor != 0) {
    throw ConfigError("coarsening factor " + std::to_string(factor) + " does not divide " +
                      std::to_string(path.steps) + " steps");
  }
  WienerPath out;
  out.seed = path.seed;
  out.dt = path.dt * factor;
  out.steps = path.steps / factor;
  out.bound = truncation_bound(out.dt, truncation_k);
  out.raw.resize(out.steps);
  out.truncated.resize(out.steps);
  for (int k = 0; k < out.steps; ++k) {
    double sum = 0.0;
    for (int j = 0; j < factor; ++j) sum += path.raw[k * factor + j];
    out.raw[k] = sum;
    out.truncated[k] = clamp_increment(sum, out.bound);
  }
  return out;
}

IncrementStatistics sample_statistics(std::span<const WienerPath> paths) {
  IncrementStatistics s;
  double sum = 0.0;
  for (const auto& p : paths) {
    for (double x : p.raw) sum += x;
    s.count += p.raw.size();
  }
  if (s.count == 0) throw ConfigError("no increments to summarize");
  s.mean = sum / static_cast<double>(s.count);
  if (s.count < 2) {
    s.degenerate = true;
    return s;
  }
  double ss = 0.0;
  for (const auto& p : paths) {
    for (double x : p.raw) ss += (x - s.mean) * (x - s.mean);
  }
  s.variance = ss / static_cast<double>(s.count - 1);
  return s;
}

}  // namespace stochms
