// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--out DIR] [criterion ...]
//
// With no criteria listed all eight run. Artifacts of the long runs land in
// DIR (default acceptance_out).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "stochms/conservation.hpp"
#include "stochms/errors.hpp"
#include "stochms/harness.hpp"
#include "stochms/wiener.hpp"

using namespace stochms;
namespace fs = std::filesystem;

namespace {

fs::path g_out = "acceptance_out";

struct Verdict {
  bool pass;
  std::string detail;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

FieldState random_cells(int N, std::uint64_t seed, std::uint64_t& counter) {
  FieldState s(N, 1, 4);
  for (auto& x : s.values) x = 0.5 * standard_normal(seed, counter++);
  return s;
}

TangentField random_tangent(int N, std::uint64_t seed, std::uint64_t& counter) {
  TangentField t(N, 1, 4);
  for (auto& x : t.values) x = standard_normal(seed, counter++);
  return t;
}

Verdict tableau_validation() {
  const auto mid = midpoint_tableau();
  const auto c = check_consistency(mid);
  const auto s = check_symplecticity(mid);
  const auto ee = explicit_euler_tableau();
  const bool ee_fails = !(check_consistency(ee).pass && check_symplecticity(ee).pass);
  const bool pass = c.pass && s.pass && c.max_residual <= 1e-14 && s.max_residual <= 1e-14 && ee_fails;
  return {pass, "midpoint consistency " + sci(c.max_residual) + ", symplecticity " + sci(s.max_residual) +
                    "; explicit Euler rejected: " + (ee_fails ? "yes" : "no")};
}

double worst_two_form(const MultisymplecticSystem& sys, std::uint64_t seed) {
  const int N = 32;
  const Grid1D g{N, 40.0 / N, 0.0};
  const auto tab = midpoint_tableau();
  const SolverConfig solver{SolverKind::Newton, 1e-12, 50};
  const double dt = 0.02;
  std::uint64_t counter = 0;
  auto state = random_cells(N, seed, counter);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double dW = std::sqrt(dt) * standard_normal(seed, counter++);
    const auto res = step(sys, g, state, dW, dt, tab, solver);
    TangentPair pair;
    pair.u0 = random_tangent(N, seed, counter);
    pair.v0 = random_tangent(N, seed, counter);
    pair.u = step_tangent(sys, g, res.stages, pair.u0, dW, dt, tab);
    pair.v = step_tangent(sys, g, res.stages, pair.v0, dW, dt, tab);
    worst = std::max(worst, check_two_form_law(sys, g, tab, pair, dW, dt).max_residual);
    state = res.state;
  }
  return worst;
}

Verdict two_form_law() {
  const double lt = worst_two_form(nls_transport_system(0.0, 0.1), 101);
  const double ld = worst_two_form(nls_dispersion_system(0.0, 0.1), 102);
  const double nt = worst_two_form(nls_transport_system(-1.0, 0.1), 103);
  const double nd = worst_two_form(nls_dispersion_system(-1.0, 0.1), 104);
  const bool pass = lt <= 1e-10 && ld <= 1e-10 && nt <= 1e-9 && nd <= 1e-9;
  return {pass, "kappa 0: transport " + sci(lt) + ", dispersion " + sci(ld) + " (<= 1e-10); kappa -1: transport " +
                    sci(nt) + ", dispersion " + sci(nd) + " (<= 1e-9)"};
}

Verdict momentum_law() {
  const int N = 32;
  const Grid1D g{N, 40.0 / N, 0.0};
  const auto sys = nls_dispersion_system(0.0, 0.1);
  const auto tab = midpoint_tableau();
  std::uint64_t counter = 0;
  auto state = random_cells(N, 201, counter);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double dW = std::sqrt(0.02) * standard_normal(201, counter++);
    const auto res = step(sys, g, state, dW, 0.02, tab, {SolverKind::Newton, 1e-12, 50});
    worst = std::max(worst, check_momentum_law(sys, g, state, res, dW, 0.02, tab).max_residual);
    state = res.state;
  }
  return {worst <= 1e-10, "max per-step |dP| " + sci(worst) + " over 50 steps (<= 1e-10)"};
}

Verdict oracle_equivalence() {
  const Grid1D g{64, 40.0 / 64, 0.0};
  const auto path = sample_path(301, 0.02, 10);
  const SolverConfig solver{SolverKind::Newton, 1e-13, 50};
  double worst[2] = {0.0, 0.0};
  for (int model = 0; model < 2; ++model) {
    const auto sys = model == 0 ? nls_transport_system(-1.0, 0.1) : nls_dispersion_system(-1.0, 0.1);
    PsiField psi = initial_condition(g);
    FieldState cells = to_cell_state(psi, g);
    for (int k = 0; k < path.steps; ++k) {
      const double dW = path.truncated[k];
      psi = (model == 0 ? midpoint_step_transport(psi, dW, 0.02, g, -1.0, 0.1, solver)
                        : midpoint_step_dispersion(psi, dW, 0.02, g, -1.0, 0.1, solver))
                .state;
      cells = step(sys, g, cells, dW, 0.02, midpoint_tableau(), solver).state;
      const PsiField avg = cell_average(psi);
      for (int n = 0; n < g.n_cells; ++n) {
        worst[model] = std::max(
            {worst[model], std::abs(avg.p[n] - cells.at(n)[0]), std::abs(avg.q[n] - cells.at(n)[1])});
      }
    }
  }
  return {worst[0] <= 1e-8 && worst[1] <= 1e-8,
          "max |reduced - generic|: transport " + sci(worst[0]) + ", dispersion " + sci(worst[1]) + " (<= 1e-8)"};
}

Verdict transport_experiment() {
  RunConfig cfg = profile_config("ci");
  cfg.output_dir = (g_out / "transport_run").string();
  const auto r = run(cfg);
  double wd = 0.0, wm = 0.0;
  for (const auto& s : r.series) {
    wd = std::max(wd, std::abs(s.density_err));
    wm = std::max(wm, std::abs(s.momentum_err));
  }
  return {r.completed && wd <= 1e-5 && wm <= 1e-5,
          "T = " + std::to_string(static_cast<int>(cfg.t1)) + ": max |density err| " + sci(wd) +
              ", max |momentum err| " + sci(wm) + " (<= 1e-5)"};
}

Verdict strong_convergence() {
  RunConfig cfg = profile_config("ci");
  cfg.solver.tolerance = 1e-10;
  cfg.output_dir = (g_out / "convergence_stochastic").string();
  const auto sto = convergence_study(cfg);

  RunConfig det = cfg;
  det.noise = 0.0;
  det.convergence_members = 1;
  det.output_dir = (g_out / "convergence_deterministic").string();
  const auto dl = convergence_study(det);

  std::string table;
  for (std::size_t j = 0; j < sto.rows.size(); ++j) {
    table += (j ? ", " : "") + sci(sto.rows[j].rms_error) + "/" + sci(dl.rows[j].rms_error);
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "slope xi=0.1: %.3f (in [0.7, 1.3]), xi=0: %.3f (in [1.8, 2.2]); ", sto.slope,
                dl.slope);
  const bool pass = sto.slope >= 0.7 && sto.slope <= 1.3 && dl.slope >= 1.8 && dl.slope <= 2.2;
  return {pass, buf + std::string("errors stochastic/deterministic ") + table};
}

Verdict ensemble_shape() {
  RunConfig tr = profile_config("ci");
  tr.output_dir = (g_out / "ensemble_transport").string();
  const auto et = ensemble(tr, 32);
  RunConfig di = tr;
  di.model = "nls-dispersion";
  di.output_dir = (g_out / "ensemble_dispersion").string();
  const auto ed = ensemble(di, 32);
  if (et.completed != 32 || ed.completed != 32) return {false, "not all members completed"};

  double avg = 0.0;
  for (const auto& s : et.stats) avg += s.mean_momentum_err;
  avg /= static_cast<double>(et.stats.size());
  const auto& ft = et.stats.back();
  const auto& fd = ed.stats.back();
  const double bound = 3.0 * ft.std_momentum_err / std::sqrt(32.0);
  const bool centred = std::abs(avg) <= bound;
  const bool var_d = fd.std_density_err > ft.std_density_err;
  const bool var_m = fd.std_momentum_err > ft.std_momentum_err;
  return {centred && var_d && var_m,
          "transport momentum err time-averaged mean " + sci(avg) + " vs 3 std/sqrt(32) = " + sci(bound) +
              "; final std density err dispersion " + sci(fd.std_density_err) + " > transport " +
              sci(ft.std_density_err) + ", momentum err " + sci(fd.std_momentum_err) + " > " +
              sci(ft.std_momentum_err)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict reproducibility() {
  RunConfig cfg = profile_config("ci");
  cfg.t1 = 2.0;
  cfg.seed = 4242;
  const fs::path a = g_out / "repro_a", b = g_out / "repro_b";
  run(cfg, a);
  run(cfg, b);
  bool same = true;
  for (const char* f : {"conservation.csv", "snapshots.csv", "steps.csv"}) {
    same = same && fs::exists(a / f) && slurp(a / f) == slurp(b / f);
  }
  return {same, std::string("conservation, snapshots and steps CSVs ") + (same ? "byte-identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out" && i + 1 < argc) {
      g_out = argv[++i];
    } else {
      wanted.insert(std::stoi(a));
    }
  }
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"tableau validation", tableau_validation},
      {"two-form conservation law", two_form_law},
      {"discrete momentum conservation", momentum_law},
      {"reduced/generic oracle equivalence", oracle_equivalence},
      {"transport experiment (CI profile)", transport_experiment},
      {"strong convergence", strong_convergence},
      {"ensemble statistics", ensemble_shape},
      {"reproducibility", reproducibility},
  };
  fs::create_directories(g_out);
  int failures = 0;
  for (int i = 0; i < 8; ++i) {
    if (!wanted.empty() && !wanted.count(i + 1)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v{false, ""};
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                v.detail.c_str(), secs);
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
