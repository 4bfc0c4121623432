// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dwelltime/barrier1d.hpp"
#include "dwelltime/kp_resonance.hpp"
#include "dwelltime/three_body.hpp"
#include "dwelltime/time_observables.hpp"
#include "oracles.hpp"

using namespace dwelltime;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

// "name=value (tol)" fragments joined by "; "
struct Detail {
  std::ostringstream s;
  bool ok = true;
  void below(const std::string& name, double value, double tol) {
    const bool pass = std::isfinite(value) && value < tol;
    ok = ok && pass;
    add(name + "=" + sci(value) + " < " + sci(tol));
  }
  void above(const std::string& name, double value, double floor) {
    const bool pass = std::isfinite(value) && value >= floor;
    ok = ok && pass;
    add(name + "=" + sci(value) + " >= " + sci(floor));
  }
  void require(const std::string& name, bool pass) {
    ok = ok && pass;
    add(name + (pass ? " yes" : " NO"));
  }
  void add(const std::string& text) { s << (s.tellp() > 0 ? "; " : "") << text; }
  Outcome done() { return {ok, s.str()}; }
};

const PotentialSpec kWell = PotentialSpec::square_well(10.0, 1.0);
const PotentialSpec kGauss = PotentialSpec::gaussian(12.0, 0.5, 2.0);
const PotentialSpec kBarrier = PotentialSpec::rectangular_barrier(5.0, 1.0);

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

Outcome free_particle_anchor() {
  Detail d;
  const auto s = solve_barrier_1d(PotentialSpec::rectangular_barrier(0.0, 5.0), 0.5, 1.0);
  const double tau = dwell_time(sampled_field(s), {0.0, 5.0}, s.incident_flux()).tau;
  d.below("|tau_D/5-1|", std::abs(tau / 5.0 - 1.0), 1e-8);
  double worst = 0.0;
  const RadialGrid grid = grid_to(1.0, 1e-3);
  for (double E : linspace(0.1, 10.0, 100)) {
    worst = std::max(worst, std::abs(match_scattering(integrate_radial(PotentialSpec(), E, 1.0, grid), 1.0).delta));
  }
  d.below("max|delta|", worst, 1e-10);
  return d.done();
}

Outcome square_well_phase_shift() {
  Detail d;
  const oracle::SquareWell sw{10.0L, 1.0L, 1.0L};
  const RadialGrid grid = grid_to(1.0, 1e-3);
  double worst = 0.0;
  for (double E : linspace(0.05, 10.0, 200)) {
    const double delta = match_scattering(integrate_radial(kWell, E, 1.0, grid), 1.0).delta;
    worst = std::max(worst, std::abs(nearest_branch(delta - static_cast<double>(sw.delta(E)), 0.0, M_PI)));
  }
  d.below("max|delta-closed form|", worst, 1e-8);
  return d.done();
}

Outcome log_derivative_identity() {
  Detail d;
  const oracle::SquareWell sw{10.0L, 1.0L, 1.0L};
  double well = 0.0;
  double well_oracle = 0.0;
  for (double E : linspace(0.1, 8.0, 80)) {
    const double v = std::sqrt(2.0 * E);
    const double tau = kp_log_derivative_dwell(kWell, E, 1.0, 1.0).tau;
    well = std::max(well, std::abs(tau - (phase_time_delay(kWell, E, 1.0) + 1.0 / v)));
    well_oracle = std::max(well_oracle, std::abs(tau - (static_cast<double>(2 * sw.ddelta(E)) + 1.0 / v)));
  }
  double gauss = 0.0;
  TimeOptions opts;
  opts.r0 = 2.0;
  for (double E : linspace(0.1, 8.0, 80)) {
    const double v = std::sqrt(2.0 * E);
    const double tau = kp_log_derivative_dwell(kGauss, E, 1.0, 2.0, opts).tau;
    gauss = std::max(gauss, std::abs(tau - (phase_time_delay(kGauss, E, 1.0, opts) + 2.0 / v)));
  }
  d.below("square well", well, 1e-6);
  d.below("square well vs closed form", well_oracle, 1e-6);
  d.below("gaussian", gauss, 1e-6);
  return d.done();
}

Outcome winful_decomposition() {
  Detail d;
  double worst = 0.0;
  bool unflagged = true;
  for (double E : linspace(0.2, 10.0, 50)) {
    const auto r = winful_decomposition_1d(solve_barrier_1d(kBarrier, E, 1.0), E, 1.0);
    worst = std::max(worst, r.identity_residual);
    unflagged = unflagged && r.flags.empty();
  }
  bool flagged = true;
  for (double E : {0.005, 0.01, 0.02, 0.04}) {
    const auto r = winful_decomposition_1d(solve_barrier_1d(kBarrier, E, 1.0), E, 1.0);
    flagged = flagged && r.has_flag("threshold-singular");
  }
  d.below("max residual on [0.2,10]", worst, 1e-6);
  d.require("no flags on [0.2,10]", unflagged);
  d.require("threshold-singular below 0.05", flagged);
  return d.done();
}

Outcome width_dwell_identity() {
  Detail d;
  struct Case {
    double mass;
    Complex seed;
  };
  // single channel plus the two channel masses of the three-body regression model
  const std::vector<Case> cases{{1.0, {1.2, -1.5}}, {20.0 / 9.0, {4.0, -2.0}}, {0.8, {4.2, -3.5}}};
  auto residual = [&](const Case& c, double spacing) {
    const auto r = find_kp_eigenvalues(kWell, c.mass, {c.seed}, 1.0, grid_to(1.0, spacing), KpOptions{});
    if (r.eigenpairs.empty()) return std::nan("");
    double worst = 0.0;
    for (const auto& e : r.eigenpairs) worst = std::max(worst, verify_width_dwell(e).relative_residual);
    return worst;
  };
  double production = 0.0;
  double ratio = INFINITY;
  for (const auto& c : cases) {
    production = std::max(production, residual(c, 1e-3));
    // Halvings of the production spacing; coarser grids are still pre-asymptotic.
    ratio = std::min(ratio, residual(c, 2e-3) / residual(c, 1e-3));
    ratio = std::min(ratio, residual(c, 1e-3) / residual(c, 5e-4));
  }
  d.below("max residual at spacing 1e-3", production, 1e-8);
  d.above("min halving ratio", ratio, 8.0);
  return d.done();
}

Outcome smith_identity() {
  Detail d;
  const RadialGrid grid = grid_to(1.0, 1e-3);
  const auto base = smith_identity_residual(kWell, 1.0, 1.0, grid, 1e-4);
  d.below("max-norm", base.max_norm, 1e-5);
  const double r4 = smith_identity_residual(kWell, 1.0, 1.0, grid, 4e-3).max_norm;
  const double r2 = smith_identity_residual(kWell, 1.0, 1.0, grid, 2e-3).max_norm;
  const double r1 = smith_identity_residual(kWell, 1.0, 1.0, grid, 1e-3).max_norm;
  // three-level estimate removes the h-independent floor
  const double order = std::log2(std::abs(r4 - r2) / std::abs(r2 - r1));
  d.above("observed order in h", order, 1.95);
  return d.done();
}

struct ThreeBody {
  ThreeBodyModel model;
  ResonanceEigenpair r;
  ResonanceEigenpair rho;
};

ThreeBody three_body(const std::array<double, 3>& masses, Complex seed_r, Complex seed_rho, double spacing) {
  ThreeBody t;
  t.model = build_three_body(masses, kWell, kWell, 1.0, 1.0);
  auto [a, b] = solve_subsystems(t.model, {seed_r}, {seed_rho}, KpOptions{}, spacing);
  t.r = a;
  t.rho = b;
  return t;
}

ThreeBody regression(double spacing) { return three_body({4.0, 4.0, 1.0}, {4.0, -2.0}, {4.2, -3.5}, spacing); }

Outcome reciprocal_addition() {
  Detail d;
  const auto reg = regression(2e-4);
  const auto rep = three_body_dwell(reg.model, reg.r, reg.rho);
  d.below("identity residual", rep.identity_residual, 1e-8);
  d.below("|tau_3b Gamma_R - 1|", rep.lifetime_residual, 1e-8);
  const auto sym = three_body({2.0, 3.0, 3.0}, {11.0, -4.5}, {11.0, -4.5}, 2e-4);
  const auto srep = three_body_dwell(sym.model, sym.r, sym.rho);
  d.below("symmetric |tau_3b/(tau_chi/2)-1|", std::abs(srep.tau_3b / (0.5 * srep.tau_chi) - 1.0), 1e-8);
  return d.done();
}

Outcome continuity() {
  Detail d;
  const auto reg = regression(2e-4);
  const auto c = continuity_residual(reg.r, reg.rho);
  d.below("integrated r", c.integrated_r, 1e-8);
  d.below("integrated rho", c.integrated_rho, 1e-8);
  std::vector<double> residuals;
  for (double h : {2e-2, 1e-2, 5e-3}) {
    const auto t = regression(h);
    residuals.push_back(continuity_residual(t.r, t.rho).generalized_max);
  }
  const double order = std::min(std::log2(residuals[0] / residuals[1]), std::log2(residuals[1] / residuals[2]));
  // Numerov values and the five-point current derivative are both fourth order.
  d.above("observed pointwise order", order, 3.5);
  return d.done();
}

int run(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  Detail d;
  const fs::path root = fs::temp_directory_path() / ("dwelltime_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::string cli = DWELLTIME_CLI_PATH;
  const std::string config = std::string(DWELLTIME_CONFIG_DIR) + "/regression.json";
  const int a = run(cli + " verify --config " + config + " --out " + (root / "a").string() + " > /dev/null");
  const int b = run(cli + " verify --config " + config + " --out " + (root / "b").string() + " > /dev/null");
  d.require("both runs exit 0", a == 0 && b == 0);
  int files = 0;
  bool identical = true;
  if (fs::exists(root / "a")) {
    for (const auto& entry : fs::directory_iterator(root / "a")) {
      const std::string name = entry.path().filename().string();
      if (name.find(".meta.json") != std::string::npos) continue;
      ++files;
      identical = identical && fs::exists(root / "b" / name) && slurp(entry.path()) == slurp(root / "b" / name);
    }
  }
  d.require("data files present", files > 0);
  d.require("byte-identical", identical);
  fs::remove_all(root);
  return d.done();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 free-particle anchor", free_particle_anchor},
      {"2 square-well phase shift", square_well_phase_shift},
      {"3 log-derivative dwell identity", log_derivative_identity},
      {"4 winful decomposition", winful_decomposition},
      {"5 width-dwell identity", width_dwell_identity},
      {"6 smith identity", smith_identity},
      {"7 three-body reciprocal addition", reciprocal_addition},
      {"8 continuity", continuity},
      {"9 determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
