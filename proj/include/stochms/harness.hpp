#pragma once

// Configuration, run orchestration and CSV artifacts.
//
// Config files are flat `key = value` lines with dotted sections; `#` starts
// a comment. Unknown keys and malformed values are errors. Keys:
//
//   model.name            nls-transport | nls-dispersion
//   model.kappa           nonlinearity (-1 focusing)
//   model.noise           xi (transport) or epsilon (dispersion)
//   grid.x0 grid.length grid.dx
//   time.t0 time.t1 time.dt
//   solver.kind           fixed-point | newton
//   solver.tolerance solver.max_iter
//   solver.kernels        parallel | serial
//   noise.seed noise.truncation (true|false) noise.truncation_k
//   output.dir output.snapshot_stride output.step_report (true|false)
//   ensemble.members ensemble.workers (0 = OpenMP default)
//   convergence.dt_list   comma separated, nested by integer factors
//   convergence.members convergence.t1
//   convergence.x0 convergence.length convergence.dx   (window of the study)

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "stochms/collocation.hpp"
#include "stochms/nls.hpp"

namespace stochms {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::string model = "nls-transport";
  double kappa = -1.0;
  double noise = 0.1;

  double x0 = 0.0;
  double length = 40.0;
  double dx = 0.1;

  double t0 = 0.0;
  double t1 = 20.0;
  double dt = 0.02;

  SolverConfig solver{SolverKind::FixedPoint, 1e-6, 100};
  kernels::Mode kernel_mode = kernels::Mode::Parallel;

  std::uint64_t seed = 1;
  bool truncation = true;
  double truncation_k = 1.0;

  std::string output_dir = "out";
  int snapshot_stride = 50;
  bool step_report = true;

  int members = 32;
  int workers = 0;

  std::vector<double> dt_list{0.04, 0.02, 0.01, 0.005};
  int convergence_members = 16;
  double convergence_t1 = 5.0;
  double convergence_x0 = -10.0;
  double convergence_length = 50.0;
  double convergence_dx = 0.0025;

  /// Throws ConfigError on inconsistent values (t1 <= t0, dt not dividing
  /// the interval, dx not dividing the length, ...).
  void validate() const;
  int steps() const;
  Grid1D grid() const;
  Grid1D convergence_grid() const;
};

/// "ci" (T = 20) or "paper" (T = 80) on top of the defaults.
RunConfig profile_config(const std::string& profile);

/// Applies `key = value` lines to `cfg`.
void apply_config_text(RunConfig& cfg, const std::string& text);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Canonical `key = value` listing, one key per line, sorted.
std::map<std::string, std::string> config_entries(const RunConfig& cfg);

/// FNV-1a over the canonical listing, excluding the seed, output directory
/// and worker count (so ensemble members share a hash).
std::string config_hash(const RunConfig& cfg);

struct SeriesRow {
  int step = 0;
  double t = 0.0;
  double density = 0.0;
  double density_err = 0.0;
  double momentum = 0.0;
  double momentum_err = 0.0;
};

struct StepRow {
  int step = 0;
  int iterations = 0;
  double residual = 0.0;
  double dW = 0.0;
  bool clamped = false;
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> density;
};

struct RunResult {
  std::vector<SeriesRow> series;
  std::vector<StepRow> steps;
  std::vector<Snapshot> snapshots;
  PsiField final_state;
  double final_W = 0.0;  // sum of raw increments
  bool completed = false;
  int failed_step = -1;
  std::string failure;
};

/// In-memory run with the given seed.
RunResult simulate(const RunConfig& cfg, std::uint64_t seed);

/// Simulates and writes conservation.csv, snapshots.csv and (optionally)
/// steps.csv to `dir`.
RunResult run(const RunConfig& cfg, const std::filesystem::path& dir);
RunResult run(const RunConfig& cfg);

struct StatsRow {
  double t = 0.0;
  double mean_density_err = 0.0;
  double std_density_err = 0.0;
  double mean_momentum_err = 0.0;
  double std_momentum_err = 0.0;
};

struct EnsembleResult {
  int members = 0;
  int completed = 0;
  std::vector<StatsRow> stats;
  std::vector<std::filesystem::path> member_dirs;
};

/// Pointwise mean and sample standard deviation (0 for one series) over
/// equally long series.
std::vector<StatsRow> ensemble_stats(const std::vector<std::vector<SeriesRow>>& members);

/// Member i runs with seed cfg.seed + i into <out>/member_XXX; stats over
/// completed members go to <out>/stats.csv.
EnsembleResult ensemble(const RunConfig& cfg, int members);

struct ConvergenceRow {
  double dt = 0.0;
  double rms_error = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  double slope = 0.0;  // NaN with fewer than two entries
  bool slope_defined = false;
};

/// Strong error at convergence.t1 against the exact soliton on the
/// convergence window. Paths for coarser steps are coarsened from the
/// finest one. Writes <out>/convergence.csv.
ConvergenceResult convergence_study(const RunConfig& cfg);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct CheckOutcome {
  bool pass = false;
  std::string detail;
};

struct CheckOptions {
  std::string model = "nls-transport";
  double kappa = 0.0;
  double noise = 0.1;
  std::string tableau = "midpoint";
  std::uint64_t seed = 1;
};

/// "structure", "tableau", "two-form" or "momentum" on built-in fixtures.
CheckOutcome check(const std::string& what, const CheckOptions& opts);

/// Parsed CSV: '#' metadata lines as key/value, one header row, numeric rows.
struct CsvTable {
  std::map<std::string, std::string> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Throws ConfigError with a line number on malformed input.
CsvTable read_csv(const std::filesystem::path& path);

/// Conservation rows of a persisted member file.
std::vector<SeriesRow> read_series(const std::filesystem::path& path);

}  // namespace stochms
