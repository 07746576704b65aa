#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stochms/errors.hpp"
#include "stochms/harness.hpp"

namespace stochms {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw ConfigError("'" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("'" + key + "': expected an integer, got '" + v + "'");
  return out;
}

int parse_count(const std::string& key, const std::string& v) {
  const long long n = parse_int(key, v);
  if (n < 0 || n > 1'000'000'000) throw ConfigError("'" + key + "': out of range");
  return static_cast<int>(n);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("'" + key + "': expected true or false, got '" + v + "'");
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

bool divides(double whole, double part, int& count) {
  const double ratio = whole / part;
  const double r = std::round(ratio);
  count = static_cast<int>(r);
  return r >= 1.0 && std::abs(ratio - r) <= 1e-9 * std::max(1.0, r);
}

}  // namespace

void RunConfig::validate() const {
  if (model != "nls-transport" && model != "nls-dispersion") {
    throw ConfigError("model.name must be nls-transport or nls-dispersion, got '" + model + "'");
  }
  if (!(t1 > t0)) throw ConfigError("time.t1 must exceed time.t0");
  if (!(dt > 0.0)) throw ConfigError("time.dt must be positive");
  int n = 0;
  if (!divides(t1 - t0, dt, n)) throw ConfigError("time.dt does not divide [t0, t1]");
  if (!(dx > 0.0) || !(length > 0.0)) throw ConfigError("grid.dx and grid.length must be positive");
  if (!divides(length, dx, n)) throw ConfigError("grid.dx does not divide grid.length");
  if (n < 3) throw ConfigError("grid needs at least 3 cells");
  if (truncation && !(dt < 1.0)) throw ConfigError("truncated increments need time.dt < 1");
  if (!(truncation_k >= 1.0)) throw ConfigError("noise.truncation_k must be at least 1");
  if (!(solver.tolerance > 0.0)) throw ConfigError("solver.tolerance must be positive");
  if (solver.max_iter < 1) throw ConfigError("solver.max_iter must be at least 1");
  if (snapshot_stride < 1) throw ConfigError("output.snapshot_stride must be at least 1");
  if (members < 1) throw ConfigError("ensemble.members must be at least 1");
  if (convergence_members < 1) throw ConfigError("convergence.members must be at least 1");
  if (!(convergence_t1 > 0.0) || !(convergence_dx > 0.0) || !(convergence_length > 0.0)) {
    throw ConfigError("convergence.t1, convergence.dx and convergence.length must be positive");
  }
  if (!divides(convergence_length, convergence_dx, n) || n < 3) {
    throw ConfigError("convergence.dx does not divide convergence.length");
  }
}

int RunConfig::steps() const {
  int n = 0;
  divides(t1 - t0, dt, n);
  return n;
}

Grid1D RunConfig::grid() const {
  int n = 0;
  divides(length, dx, n);
  return {n, dx, x0};
}

Grid1D RunConfig::convergence_grid() const {
  int n = 0;
  divides(convergence_length, convergence_dx, n);
  return {n, convergence_dx, convergence_x0};
}

RunConfig profile_config(const std::string& profile) {
  RunConfig cfg;
  if (profile == "ci") {
    cfg.t1 = 20.0;
  } else if (profile == "paper") {
    cfg.t1 = 80.0;
  } else {
    throw ConfigError("unknown profile '" + profile + "' (expected ci or paper)");
  }
  return cfg;
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& v) {
  if (key == "model.name") {
    c.model = v;
  } else if (key == "model.kappa") {
    c.kappa = parse_double(key, v);
  } else if (key == "model.noise") {
    c.noise = parse_double(key, v);
  } else if (key == "grid.x0") {
    c.x0 = parse_double(key, v);
  } else if (key == "grid.length") {
    c.length = parse_double(key, v);
  } else if (key == "grid.dx") {
    c.dx = parse_double(key, v);
  } else if (key == "time.t0") {
    c.t0 = parse_double(key, v);
  } else if (key == "time.t1") {
    c.t1 = parse_double(key, v);
  } else if (key == "time.dt") {
    c.dt = parse_double(key, v);
  } else if (key == "solver.kind") {
    c.solver.kind = solver_kind_from_string(v);
  } else if (key == "solver.tolerance") {
    c.solver.tolerance = parse_double(key, v);
  } else if (key == "solver.max_iter") {
    c.solver.max_iter = parse_count(key, v);
  } else if (key == "solver.kernels") {
    if (v == "parallel") {
      c.kernel_mode = kernels::Mode::Parallel;
    } else if (v == "serial") {
      c.kernel_mode = kernels::Mode::Serial;
    } else {
      throw ConfigError("'solver.kernels': expected parallel or serial, got '" + v + "'");
    }
  } else if (key == "noise.seed") {
    const long long s = parse_int(key, v);
    if (s < 0) throw ConfigError("'noise.seed' must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "noise.truncation") {
    c.truncation = parse_bool(key, v);
  } else if (key == "noise.truncation_k") {
    c.truncation_k = parse_double(key, v);
  } else if (key == "output.dir") {
    c.output_dir = v;
  } else if (key == "output.snapshot_stride") {
    c.snapshot_stride = parse_count(key, v);
  } else if (key == "output.step_report") {
    c.step_report = parse_bool(key, v);
  } else if (key == "ensemble.members") {
    c.members = parse_count(key, v);
  } else if (key == "ensemble.workers") {
    c.workers = parse_count(key, v);
  } else if (key == "convergence.dt_list") {
    std::vector<double> list;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) list.push_back(parse_double(key, trim(item)));
    if (list.empty()) throw ConfigError("'convergence.dt_list' is empty");
    c.dt_list = list;
  } else if (key == "convergence.members") {
    c.convergence_members = parse_count(key, v);
  } else if (key == "convergence.t1") {
    c.convergence_t1 = parse_double(key, v);
  } else if (key == "convergence.x0") {
    c.convergence_x0 = parse_double(key, v);
  } else if (key == "convergence.length") {
    c.convergence_length = parse_double(key, v);
  } else if (key == "convergence.dx") {
    c.convergence_dx = parse_double(key, v);
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

std::map<std::string, std::string> config_entries(const RunConfig& c) {
  std::string dts;
  for (std::size_t i = 0; i < c.dt_list.size(); ++i) dts += (i ? "," : "") + fmt(c.dt_list[i]);
  return {
      {"model.name", c.model},
      {"model.kappa", fmt(c.kappa)},
      {"model.noise", fmt(c.noise)},
      {"grid.x0", fmt(c.x0)},
      {"grid.length", fmt(c.length)},
      {"grid.dx", fmt(c.dx)},
      {"time.t0", fmt(c.t0)},
      {"time.t1", fmt(c.t1)},
      {"time.dt", fmt(c.dt)},
      {"solver.kind", to_string(c.solver.kind)},
      {"solver.tolerance", fmt(c.solver.tolerance)},
      {"solver.max_iter", std::to_string(c.solver.max_iter)},
      {"solver.kernels", c.kernel_mode == kernels::Mode::Parallel ? "parallel" : "serial"},
      {"noise.seed", std::to_string(c.seed)},
      {"noise.truncation", c.truncation ? "true" : "false"},
      {"noise.truncation_k", fmt(c.truncation_k)},
      {"output.dir", c.output_dir},
      {"output.snapshot_stride", std::to_string(c.snapshot_stride)},
      {"output.step_report", c.step_report ? "true" : "false"},
      {"ensemble.members", std::to_string(c.members)},
      {"ensemble.workers", std::to_string(c.workers)},
      {"convergence.dt_list", dts},
      {"convergence.members", std::to_string(c.convergence_members)},
      {"convergence.t1", fmt(c.convergence_t1)},
      {"convergence.x0", fmt(c.convergence_x0)},
      {"convergence.length", fmt(c.convergence_length)},
      {"convergence.dx", fmt(c.convergence_dx)},
  };
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : config_entries(cfg)) {
    if (k == "noise.seed" || k == "output.dir" || k == "ensemble.workers") continue;
    for (char ch : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(ch);
      h *= 0x100000001b3ULL;
    }
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace stochms
