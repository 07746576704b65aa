// stochms command line: run, ensemble, converge, check.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "stochms/errors.hpp"
#include "stochms/harness.hpp"

using namespace stochms;

namespace {

struct Common {
  std::string config;
  std::string profile = "ci";
  std::optional<std::uint64_t> seed;
  std::optional<int> members;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key = value configuration file")->check(CLI::ExistingFile);
  app->add_option("--profile", c.profile, "preset: ci (T = 20) or paper (T = 80)")
      ->check(CLI::IsMember({"ci", "paper"}));
  app->add_option("--seed", c.seed, "noise seed (ensemble members use seed + i)");
  app->add_option("--members", c.members, "ensemble or convergence members");
  app->add_option("--out", c.out, "output directory");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = profile_config(c.profile);
  if (!c.config.empty()) apply_config_file(cfg, c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.members) {
    cfg.members = *c.members;
    cfg.convergence_members = *c.members;
  }
  if (!c.out.empty()) cfg.output_dir = c.out;
  cfg.validate();
  return cfg;
}

int do_run(const Common& c) {
  const RunConfig cfg = resolve(c);
  const auto r = run(cfg);
  double worst_d = 0.0, worst_m = 0.0;
  for (const auto& s : r.series) {
    worst_d = std::max(worst_d, std::abs(s.density_err));
    worst_m = std::max(worst_m, std::abs(s.momentum_err));
  }
  std::printf("%s: %zu steps, max |density err| %.3e, max |momentum err| %.3e -> %s\n", cfg.model.c_str(),
              r.steps.size(), worst_d, worst_m, cfg.output_dir.c_str());
  if (!r.completed) {
    std::fprintf(stderr, "run failed at step %d: %s\n", r.failed_step, r.failure.c_str());
    return 1;
  }
  return 0;
}

int do_ensemble(const Common& c) {
  const RunConfig cfg = resolve(c);
  const auto e = ensemble(cfg, cfg.members);
  const auto& last = e.stats.back();
  std::printf("%d/%d members completed; at t = %g: density err %.3e +- %.3e, momentum err %.3e +- %.3e\n",
              e.completed, e.members, last.t, last.mean_density_err, last.std_density_err,
              last.mean_momentum_err, last.std_momentum_err);
  return e.completed == e.members ? 0 : 1;
}

int do_converge(const Common& c) {
  const RunConfig cfg = resolve(c);
  const auto r = convergence_study(cfg);
  for (const auto& row : r.rows) std::printf("dt %-8g rms error %.6e\n", row.dt, row.rms_error);
  if (r.slope_defined) {
    std::printf("slope %.4f\n", r.slope);
  } else {
    std::printf("slope undefined (single step size)\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic multisymplectic collocation integrator for NLS"};
  app.require_subcommand(1);

  Common run_opts, ens_opts, conv_opts;
  auto* run_cmd = app.add_subcommand("run", "single realisation: conservation, snapshot and step CSVs");
  add_common(run_cmd, run_opts);
  auto* ens_cmd = app.add_subcommand("ensemble", "members with seeds seed + i, plus stats.csv");
  add_common(ens_cmd, ens_opts);
  auto* conv_cmd = app.add_subcommand("converge", "strong error against the exact soliton");
  add_common(conv_cmd, conv_opts);

  std::string what;
  CheckOptions chk;
  auto* check_cmd = app.add_subcommand("check", "validators on built-in fixtures");
  check_cmd->add_option("what", what, "structure | tableau | two-form | momentum")->required();
  check_cmd->add_option("--model", chk.model, "nls-transport | nls-dispersion | nls-deterministic");
  check_cmd->add_option("--kappa", chk.kappa, "nonlinearity");
  check_cmd->add_option("--noise", chk.noise, "xi or epsilon");
  check_cmd->add_option("--tableau", chk.tableau, "midpoint | gauss2 | explicit-euler");
  check_cmd->add_option("--seed", chk.seed, "fixture seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return do_run(run_opts);
    if (ens_cmd->parsed()) return do_ensemble(ens_opts);
    if (conv_cmd->parsed()) return do_converge(conv_opts);
    const auto r = check(what, chk);
    std::printf("%s: %s\n", r.pass ? "PASS" : "FAIL", r.detail.c_str());
    return r.pass ? 0 : 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
