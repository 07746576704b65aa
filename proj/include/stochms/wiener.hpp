#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace stochms {

/// Identifier written into every output header.
inline constexpr std::string_view kGeneratorId = "splitmix64-counter+inverse-normal-cdf/v1";

/// Increments of one Wiener path on a uniform time grid.
struct WienerPath {
  std::uint64_t seed = 0;
  double dt = 0.0;
  int steps = 0;
  std::vector<double> raw;
  std::vector<double> truncated;
  double bound = 0.0;

  double increment(int k, bool use_truncated) const { return use_truncated ? truncated[k] : raw[k]; }
  bool clamped(int k) const { return truncated[k] != raw[k]; }
  double total_raw() const;
};

/// U(dt) = sqrt(2 k |ln dt|). Requires 0 < dt < 1 and k >= 1.
double truncation_bound(double dt, double truncation_k);

/// Three-case clamp to [-bound, bound].
double clamp_increment(double dw, double bound);

/// Standard normal variate number `counter` of the stream `seed`.
///
/// The 64-bit word is the SplitMix64 finalizer applied to
/// seed * 0x9E3779B97F4A7C15 + counter + 1; its top 53 bits give a uniform
/// u in (0, 1), mapped through the inverse normal CDF.
double standard_normal(std::uint64_t seed, std::uint64_t counter);

/// raw[k] ~ N(0, dt) iid; truncated[k] = clamp(raw[k], U(dt)).
WienerPath sample_path(std::uint64_t seed, double dt, int steps, double truncation_k = 1.0);

/// Sums raw increments over blocks of `factor`, then re-truncates at dt * factor.
WienerPath coarsen(const WienerPath& path, int factor, double truncation_k = 1.0);

struct IncrementStatistics {
  double mean = 0.0;
  double variance = 0.0;  // unbiased; 0 when degenerate
  std::size_t count = 0;
  bool degenerate = false;  // fewer than two increments
};

/// Pooled statistics over the raw increments of all paths.
IncrementStatistics sample_statistics(std::span<const WienerPath> paths);

}  // namespace stochms
