#include "stochms/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "stochms/conservation.hpp"
#include "stochms/errors.hpp"
#include "stochms/system.hpp"
#include "stochms/tableau.hpp"
#include "stochms/wiener.hpp"

namespace stochms {

namespace fs = std::filesystem;

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const fs::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot write " + path.string());
  }
  void meta(const std::string& key, const std::string& value) { out_ << "# " << key << '=' << value << '\n'; }
  void header(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
    out_ << '\n';
  }
  template <class... T>
  void row(const T&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << field(fields), first = false), ...);
    out_ << '\n';
  }
  std::ostream& stream() { return out_; }

 private:
  static std::string field(double x) { return num(x); }
  static std::string field(int x) { return std::to_string(x); }
  static std::string field(bool x) { return x ? "1" : "0"; }
  std::ofstream out_;
};

void write_metadata(CsvWriter& w, const RunConfig& cfg, std::uint64_t seed, const std::string& schema) {
  w.meta("schema", schema);
  w.meta("version", kVersion);
  w.meta("generator", std::string(kGeneratorId));
  w.meta("config_hash", config_hash(cfg));
  w.meta("seed", std::to_string(seed));
  for (const auto& [k, v] : config_entries(cfg)) {
    if (k == "noise.seed" || k == "output.dir" || k == "ensemble.workers") continue;
    w.meta("config." + k, v);
  }
}

std::vector<double> density_profile(const PsiField& psi) {
  std::vector<double> d(psi.size());
  for (int n = 0; n < psi.size(); ++n) d[n] = psi.p[n] * psi.p[n] + psi.q[n] * psi.q[n];
  return d;
}

ReducedStep advance(const RunConfig& cfg, const PsiField& psi, double dW, double dt, const Grid1D& g) {
  if (cfg.model == "nls-transport") {
    return midpoint_step_transport(psi, dW, dt, g, cfg.kappa, cfg.noise, cfg.solver, cfg.kernel_mode);
  }
  return midpoint_step_dispersion(psi, dW, dt, g, cfg.kappa, cfg.noise, cfg.solver, cfg.kernel_mode);
}

SolitonParams soliton_params(const RunConfig& cfg) {
  SolitonParams sp;
  sp.xi = cfg.model == "nls-transport" ? cfg.noise : 0.0;
  return sp;
}

void write_run(const RunConfig& cfg, std::uint64_t seed, const RunResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  const std::string status =
      r.completed ? "completed" : "failed at step " + std::to_string(r.failed_step) + ": " + r.failure;
  const Grid1D g = cfg.grid();
  {
    CsvWriter w(dir / "conservation.csv");
    write_metadata(w, cfg, seed, "conservation/v1");
    w.meta("status", status);
    w.header({"step", "t", "density", "density_err", "momentum", "momentum_err"});
    for (const auto& s : r.series) w.row(s.step, s.t, s.density, s.density_err, s.momentum, s.momentum_err);
  }
  {
    CsvWriter w(dir / "snapshots.csv");
    write_metadata(w, cfg, seed, "snapshots/v1");
    w.meta("status", status);
    w.meta("n_cells", std::to_string(g.n_cells));
    w.meta("x0", num(g.x0));
    w.meta("dx", num(g.dx));
    std::vector<std::string> cols{"t"};
    for (int n = 0; n < g.n_cells; ++n) cols.push_back("rho_" + std::to_string(n));
    w.header(cols);
    for (const auto& s : r.snapshots) {
      auto& out = w.stream();
      out << num(s.t);
      for (double d : s.density) out << ',' << num(d);
      out << '\n';
    }
  }
  if (cfg.step_report) {
    CsvWriter w(dir / "steps.csv");
    write_metadata(w, cfg, seed, "steps/v1");
    w.meta("status", status);
    w.header({"step", "iterations", "residual", "dW", "clamped"});
    for (const auto& s : r.steps) w.row(s.step, s.iterations, s.residual, s.dW, s.clamped);
  }
}

template <class Body>
void parallel_members(int count, int workers, Body body) {
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int i = 0; i < count; ++i) body(i);
}

}  // namespace

RunResult simulate(const RunConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const Grid1D g = cfg.grid();
  const int steps = cfg.steps();
  const auto path = sample_path(seed, cfg.dt, steps, cfg.truncation_k);

  RunResult r;
  PsiField psi = initial_condition(g, soliton_params(cfg));
  psi.t = cfg.t0;
  const double d0 = global_density(psi, g);
  const double m0 = global_momentum(psi, g);
  auto record = [&](int k) {
    const double d = global_density(psi, g), m = global_momentum(psi, g);
    r.series.push_back({k, psi.t, d, d - d0, m, m - m0});
    if (k % cfg.snapshot_stride == 0) r.snapshots.push_back({psi.t, density_profile(psi)});
  };
  record(0);
  for (int k = 0; k < steps; ++k) {
    const double dW = path.increment(k, cfg.truncation);
    try {
      auto next = advance(cfg, psi, dW, cfg.dt, g);
      psi = std::move(next.state);
      psi.t = cfg.t0 + (k + 1) * cfg.dt;
      r.steps.push_back({k + 1, next.report.iterations, next.report.residual_norm, dW,
                         cfg.truncation && path.clamped(k)});
    } catch (const SolverError& e) {
      r.failed_step = k + 1;
      r.failure = e.what();
      r.steps.push_back({k + 1, e.iterations(), e.last_residual(), dW, cfg.truncation && path.clamped(k)});
      r.final_state = psi;
      return r;
    }
    r.final_W += path.raw[k];
    record(k + 1);
  }
  r.final_state = psi;
  r.completed = true;
  return r;
}

RunResult run(const RunConfig& cfg, const fs::path& dir) {
  RunResult r = simulate(cfg, cfg.seed);
  write_run(cfg, cfg.seed, r, dir);
  return r;
}

RunResult run(const RunConfig& cfg) { return run(cfg, cfg.output_dir); }

std::vector<StatsRow> ensemble_stats(const std::vector<std::vector<SeriesRow>>& members) {
  if (members.empty()) return {};
  const std::size_t len = members.front().size();
  for (const auto& m : members) {
    if (m.size() != len) throw StructureError("ensemble series differ in length");
  }
  const double n = static_cast<double>(members.size());
  std::vector<StatsRow> out(len);
  for (std::size_t k = 0; k < len; ++k) {
    double sd = 0.0, sm = 0.0;
    for (const auto& m : members) {
      sd += m[k].density_err;
      sm += m[k].momentum_err;
    }
    const double md = sd / n, mm = sm / n;
    double vd = 0.0, vm = 0.0;
    for (const auto& m : members) {
      vd += (m[k].density_err - md) * (m[k].density_err - md);
      vm += (m[k].momentum_err - mm) * (m[k].momentum_err - mm);
    }
    const double denom = members.size() > 1 ? n - 1.0 : 1.0;
    out[k] = {members.front()[k].t, md, std::sqrt(vd / denom), mm, std::sqrt(vm / denom)};
  }
  return out;
}

EnsembleResult ensemble(const RunConfig& cfg, int members) {
  if (members < 1) throw ConfigError("ensemble needs at least one member");
  cfg.validate();
  const fs::path root = cfg.output_dir;
  fs::create_directories(root);

  std::vector<RunResult> results(members);
  std::vector<fs::path> dirs(members);
  std::vector<std::string> errors(members);
  for (int i = 0; i < members; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "member_%03d", i);
    dirs[i] = root / name;
  }
  parallel_members(members, cfg.workers, [&](int i) {
    try {
      const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
      results[i] = simulate(cfg, seed);
      write_run(cfg, seed, results[i], dirs[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (int i = 0; i < members; ++i) {
    if (!errors[i].empty()) throw Error("ensemble member " + std::to_string(i) + ": " + errors[i]);
  }

  EnsembleResult out;
  out.members = members;
  out.member_dirs = dirs;
  std::vector<std::vector<SeriesRow>> done;
  for (const auto& r : results) {
    if (r.completed) done.push_back(r.series);
  }
  out.completed = static_cast<int>(done.size());
  out.stats = ensemble_stats(done);

  CsvWriter w(root / "stats.csv");
  write_metadata(w, cfg, cfg.seed, "stats/v1");
  w.meta("members", std::to_string(members));
  w.meta("completed_members", std::to_string(out.completed));
  w.meta("all_completed", out.completed == members ? "true" : "false");
  w.header({"t", "mean_density_err", "std_density_err", "mean_momentum_err", "std_momentum_err"});
  for (const auto& s : out.stats) {
    w.row(s.t, s.mean_density_err, s.std_density_err, s.mean_momentum_err, s.std_momentum_err);
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw StructureError("slope fit needs equally many points");
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceResult convergence_study(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.model != "nls-transport" || cfg.kappa != -1.0) {
    throw ConfigError("the convergence study needs the exact soliton: model nls-transport with kappa = -1");
  }
  if (cfg.dt_list.empty()) throw ConfigError("convergence.dt_list is empty");
  const double T = cfg.convergence_t1;
  const double fine_dt = *std::min_element(cfg.dt_list.begin(), cfg.dt_list.end());
  auto ratio = [](double a, double b, int& n) {
    const double r = a / b;
    n = static_cast<int>(std::lround(r));
    return n >= 1 && std::abs(r - n) <= 1e-9 * n;
  };
  int fine_steps = 0;
  if (!ratio(T, fine_dt, fine_steps)) throw ConfigError("finest convergence step does not divide convergence.t1");
  std::vector<int> factors;
  for (double dt : cfg.dt_list) {
    int f = 0;
    if (!(dt > 0.0) || !ratio(dt, fine_dt, f) || fine_steps % f != 0) {
      throw ConfigError("convergence.dt_list is not nested by integer factors of its finest entry");
    }
    factors.push_back(f);
  }

  const Grid1D g = cfg.convergence_grid();
  const SolitonParams sp = soliton_params(cfg);
  const int members = cfg.convergence_members;
  const std::size_t levels = cfg.dt_list.size();
  std::vector<double> sq(static_cast<std::size_t>(members) * levels, 0.0);
  std::vector<std::string> errors(members);

  parallel_members(members, cfg.workers, [&](int i) {
    try {
      const auto fine = sample_path(cfg.seed + static_cast<std::uint64_t>(i), fine_dt, fine_steps, cfg.truncation_k);
      const PsiField exact = exact_soliton_field(g, T, fine.total_raw(), sp);
      for (std::size_t j = 0; j < levels; ++j) {
        const auto path = factors[j] == 1 ? fine : coarsen(fine, factors[j], cfg.truncation_k);
        PsiField psi = initial_condition(g, sp);
        for (int k = 0; k < path.steps; ++k) {
          psi = midpoint_step_transport(psi, path.increment(k, cfg.truncation), path.dt, g, cfg.kappa, cfg.noise,
                                        cfg.solver, kernels::Mode::Serial)
                    .state;
        }
        sq[i * levels + j] = ((psi.p - exact.p).squaredNorm() + (psi.q - exact.q).squaredNorm()) * g.dx;
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (int i = 0; i < members; ++i) {
    if (!errors[i].empty()) throw Error("convergence member " + std::to_string(i) + ": " + errors[i]);
  }

  ConvergenceResult out;
  std::vector<double> xs, ys;
  for (std::size_t j = 0; j < levels; ++j) {
    double mean = 0.0;
    for (int i = 0; i < members; ++i) mean += sq[i * levels + j];
    mean /= members;
    out.rows.push_back({cfg.dt_list[j], std::sqrt(mean)});
    xs.push_back(cfg.dt_list[j]);
    ys.push_back(std::sqrt(mean));
  }
  out.slope = loglog_slope(xs, ys);
  out.slope_defined = levels >= 2;

  const fs::path root = cfg.output_dir;
  fs::create_directories(root);
  CsvWriter w(root / "convergence.csv");
  write_metadata(w, cfg, cfg.seed, "convergence/v1");
  w.meta("members", std::to_string(members));
  w.meta("slope", out.slope_defined ? num(out.slope) : "undefined");
  w.header({"dt", "rms_error"});
  for (const auto& r : out.rows) w.row(r.dt, r.rms_error);
  return out;
}

namespace {

FieldState fixture_state(int n_cells, int stages, std::uint64_t seed, std::uint64_t& counter) {
  FieldState s(n_cells, stages, 4);
  for (auto& x : s.values) x = 0.5 * standard_normal(seed, counter++);
  return s;
}

TangentField fixture_tangent(int n_cells, int stages, std::uint64_t seed, std::uint64_t& counter) {
  TangentField t(n_cells, stages, 4);
  for (auto& x : t.values) x = standard_normal(seed, counter++);
  return t;
}

}  // namespace

CheckOutcome check(const std::string& what, const CheckOptions& o) {
  std::ostringstream msg;
  msg.precision(3);
  msg << std::scientific;
  if (what == "structure") {
    const auto rep = validate_system(system_by_name(o.model, o.kappa, o.noise));
    msg << "skew " << rep.skew_residual << ", hessian symmetry " << rep.hessian_symmetry_residual
        << ", gradient FD " << rep.grad_fd_residual << ", hessian FD " << rep.hess_fd_residual;
    return {rep.pass, msg.str()};
  }
  const TableauPair tab = tableau_by_name(o.tableau);
  if (what == "tableau") {
    const auto c = check_consistency(tab);
    const auto s = check_symplecticity(tab);
    msg << "consistency " << c.max_residual << ", symplecticity " << s.max_residual << " (tolerance "
        << kTableauTol << ")";
    return {c.pass && s.pass, msg.str()};
  }

  const int N = 32;
  const Grid1D g{N, 40.0 / N, 0.0};
  const auto sys = system_by_name(o.model, o.kappa, o.noise);
  const SolverConfig solver{SolverKind::Newton, 1e-12, 50};
  const double dt = 0.02;
  std::uint64_t counter = 0;
  auto state = fixture_state(N, tab.s(), o.seed, counter);

  if (what == "two-form") {
    const bool symplectic = check_symplecticity(tab).pass;
    const double limit = sys.ham.is_quadratic() ? 1e-10 : 1e-9;
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const double dW = std::sqrt(dt) * standard_normal(o.seed, counter++);
      const auto res = step(sys, g, state, dW, dt, tab, solver);
      TangentPair pair;
      pair.u0 = fixture_tangent(N, tab.s(), o.seed, counter);
      pair.v0 = fixture_tangent(N, tab.s(), o.seed, counter);
      pair.u = step_tangent(sys, g, res.stages, pair.u0, dW, dt, tab);
      pair.v = step_tangent(sys, g, res.stages, pair.v0, dW, dt, tab);
      worst = std::max(worst, check_two_form_law(sys, g, tab, pair, dW, dt, true).max_residual);
      state = res.state;
    }
    msg << "max relative two-form residual " << worst << " (limit " << limit << ")";
    if (!symplectic) msg << "; tableau '" << tab.name << "' is not symplectic, the law is not guaranteed";
    return {symplectic && worst <= limit, msg.str()};
  }
  if (what == "momentum") {
    if (!sys.ham.is_quadratic()) {
      return {false, "system '" + sys.label + "' has a non-quadratic Hamiltonian; the momentum law is not guaranteed"};
    }
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const double dW = std::sqrt(dt) * standard_normal(o.seed, counter++);
      const auto res = step(sys, g, state, dW, dt, tab, solver);
      worst = std::max(worst, check_momentum_law(sys, g, state, res, dW, dt, tab).max_residual);
      state = res.state;
    }
    msg << "max per-step momentum drift " << worst << " (limit " << 1e-10 << ")";
    return {worst <= 1e-10, msg.str()};
  }
  throw ConfigError("unknown check '" + what + "' (expected structure, tableau, two-form or momentum)");
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  CsvTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos || line.size() < 2) {
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": malformed metadata line");
      }
      t.meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (t.columns.empty()) {
      t.columns = fields;
      continue;
    }
    if (fields.size() != t.columns.size()) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(t.columns.size()) + " fields, got " + std::to_string(fields.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto* end = fields[i].data() + fields[i].size();
      const auto [ptr, ec] = std::from_chars(fields[i].data(), end, row[i]);
      if (ec != std::errc() || ptr != end) {
        throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": not a number: '" + fields[i] + "'");
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw ConfigError(path.string() + ": no header row");
  return t;
}

std::vector<SeriesRow> read_series(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const std::vector<std::string> expected{"step", "t", "density", "density_err", "momentum", "momentum_err"};
  if (t.columns != expected) throw ConfigError(path.string() + ": not a conservation file");
  std::vector<SeriesRow> out;
  for (const auto& r : t.rows) out.push_back({static_cast<int>(r[0]), r[1], r[2], r[3], r[4], r[5]});
  return out;
}

}  // namespace stochms
