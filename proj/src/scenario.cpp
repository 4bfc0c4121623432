#include "dwelltime/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dwelltime/barrier1d.hpp"
#include "dwelltime/errors.hpp"
#include "dwelltime/io.hpp"
#include "dwelltime/parallel.hpp"
#include "dwelltime/three_body.hpp"
#include "dwelltime/time_observables.hpp"

namespace dwelltime {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::array<std::pair<Scenario, const char*>, 7> kScenarioNames{{
    {Scenario::scatter_scan, "scatter_scan"},
    {Scenario::dwell_scan, "dwell_scan"},
    {Scenario::winful_1d, "winful_1d"},
    {Scenario::kp_find, "kp_find"},
    {Scenario::verify_eq10, "verify_eq10"},
    {Scenario::three_body, "three_body"},
    {Scenario::identity_suite, "identity_suite"},
}};

// ---- schema helpers -------------------------------------------------------

[[noreturn]] void schema_error(const std::string& key, const std::string& expected) {
  throw ConfigError("config key '" + key + "': expected " + expected);
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
  const std::string full = path.empty() ? key : path + "." + key;
  if (!obj.contains(key)) schema_error(full, "a value (missing)");
  return obj.at(key);
}

double number(const json& v, const std::string& key) {
  if (!v.is_number()) schema_error(key, "a number");
  return v.get<double>();
}

double positive(const json& v, const std::string& key) {
  const double x = number(v, key);
  if (!(x > 0.0) || !std::isfinite(x)) schema_error(key, "a positive number");
  return x;
}

double optional_positive(const json& obj, const std::string& key, const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  return positive(obj.at(key), path + "." + key);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return item.key() == a; });
    if (!known) throw ConfigError("config key '" + join(path, item.key()) + "': unknown key");
  }
}

PotentialSpec potential_at(const json& v, const std::string& key) {
  try {
    return potential_from_json(v);
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    // Messages from the potential parser start with "potential"; re-root them.
    if (msg.rfind("potential", 0) == 0) {
      const auto colon = msg.find(':');
      throw ConfigError("config key '" + key + msg.substr(9, colon - 9) + "'" + msg.substr(colon));
    }
    throw ConfigError("config key '" + key + "': " + msg);
  }
}

EnergyRange range_at(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 3) schema_error(key, "an array [E_lo, E_hi, n]");
  EnergyRange r;
  r.lo = positive(v[0], key + "[0]");
  r.hi = positive(v[1], key + "[1]");
  if (!v[2].is_number_integer() || v[2].get<long>() < 1) schema_error(key + "[2]", "a positive integer");
  r.n = v[2].get<int>();
  if (r.n > 1 && !(r.hi > r.lo)) schema_error(key, "an increasing range (E_lo < E_hi)");
  return r;
}

std::vector<Complex> seeds_at(const json& v, const std::string& key) {
  if (!v.is_array()) schema_error(key, "an array of [Re W, Im W] pairs");
  std::vector<Complex> seeds;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& s = v[i];
    const std::string at = key + "[" + std::to_string(i) + "]";
    if (!s.is_array() || s.size() != 2) schema_error(at, "a pair [Re W, Im W]");
    seeds.emplace_back(number(s[0], at + "[0]"), number(s[1], at + "[1]"));
  }
  return seeds;
}

std::string name_at(const json& v, const std::string& key) {
  if (!v.is_string() || v.get<std::string>().empty()) schema_error(key, "a non-empty string");
  const std::string name = v.get<std::string>();
  for (char c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
      schema_error(key, "a name of letters, digits, '_' or '-'");
    }
  }
  return name;
}

ModelConfig model_at(const json& obj, const std::string& path, const std::string& default_name) {
  if (!obj.is_object()) schema_error(path, "an object");
  check_keys(obj, path, {"name", "potential", "mass", "r0", "energy_range", "seeds"});
  ModelConfig m;
  m.name = obj.contains("name") ? name_at(obj.at("name"), join(path, "name")) : default_name;
  m.potential = potential_at(member(obj, "potential", path), join(path, "potential"));
  m.mass = optional_positive(obj, "mass", path, 1.0);
  m.r0 = obj.contains("r0") ? positive(obj.at("r0"), join(path, "r0")) : 0.0;
  if (m.r0 > 0.0 && m.r0 < m.potential.support_radius()) {
    schema_error(join(path, "r0"), "a radius >= the potential support radius");
  }
  m.energy_range = range_at(member(obj, "energy_range", path), join(path, "energy_range"));
  if (obj.contains("seeds")) m.seeds = seeds_at(obj.at("seeds"), join(path, "seeds"));
  return m;
}

ThreeBodyConfig three_body_at(const json& obj, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "an object");
  check_keys(obj, path,
             {"name", "masses", "V_r", "V_rho", "r_chi", "rho_phi", "seeds_r", "seeds_rho", "seed_range_r",
              "seed_range_rho"});
  ThreeBodyConfig c;
  const json& masses = member(obj, "masses", path);
  if (!masses.is_array() || masses.size() != 3) schema_error(join(path, "masses"), "an array [m1, m2, m3]");
  for (std::size_t i = 0; i < 3; ++i) c.masses[i] = positive(masses[i], join(path, "masses") + "[" + std::to_string(i) + "]");
  c.V_r = potential_at(member(obj, "V_r", path), join(path, "V_r"));
  c.V_rho = potential_at(member(obj, "V_rho", path), join(path, "V_rho"));
  c.r_chi = optional_positive(obj, "r_chi", path, c.V_r.support_radius());
  c.rho_phi = optional_positive(obj, "rho_phi", path, c.V_rho.support_radius());
  if (obj.contains("seeds_r")) c.seeds_r = seeds_at(obj.at("seeds_r"), join(path, "seeds_r"));
  if (obj.contains("seeds_rho")) c.seeds_rho = seeds_at(obj.at("seeds_rho"), join(path, "seeds_rho"));
  if (obj.contains("seed_range_r")) c.seed_range_r = range_at(obj.at("seed_range_r"), join(path, "seed_range_r"));
  if (obj.contains("seed_range_rho")) {
    c.seed_range_rho = range_at(obj.at("seed_range_rho"), join(path, "seed_range_rho"));
  }
  if (c.seeds_r.empty() && !c.seed_range_r) schema_error(join(path, "seeds_r"), "seeds or a seed_range_r");
  if (c.seeds_rho.empty() && !c.seed_range_rho) schema_error(join(path, "seeds_rho"), "seeds or a seed_range_rho");
  return c;
}

// ---- numerics shared by the runners ----------------------------------------

TimeOptions time_options(const Numerics& n, double r0) {
  TimeOptions o;
  o.spacing = n.spacing;
  o.rel_step = n.diff_step;
  o.e_min = n.e_min;
  o.r0 = r0;
  o.winful_tolerance = n.tolerance("winful_decomposition");
  return o;
}

KpOptions kp_options(const Numerics& n) {
  KpOptions o;
  o.mode = n.k_mode;
  o.k_fixed = n.k_fixed;
  o.tolerance = n.tolerance("kp_boundary_residual");
  return o;
}

std::vector<Complex> model_seeds(const ModelConfig& m, const Numerics& n) {
  if (!m.seeds.empty()) return m.seeds;
  const EnergyRange& r = m.energy_range;
  if (r.n < 2) return {};
  const auto seeds = scan_resonance_seeds(m.potential, m.mass, r.lo, r.hi, std::max(n.seed_scan_points, 3),
                                          time_options(n, m.matching_radius()));
  std::vector<Complex> w;
  for (const auto& s : seeds) w.push_back(s.W0);
  return w;
}

std::vector<Complex> channel_seeds(const std::vector<Complex>& explicit_seeds, const std::optional<EnergyRange>& range,
                                   const PotentialSpec& potential, double mass, double region, const Numerics& n) {
  if (!explicit_seeds.empty()) return explicit_seeds;
  const auto seeds = scan_resonance_seeds(potential, mass, range->lo, range->hi, std::max(range->n, 3),
                                          time_options(n, region));
  std::vector<Complex> w;
  for (const auto& s : seeds) w.push_back(s.W0);
  return w;
}

double mid_energy(const EnergyRange& r) { return r.n > 1 ? 0.5 * (r.lo + r.hi) : r.lo; }

// ---- output helpers -------------------------------------------------------

json run_metadata(const ScenarioConfig& config, const std::string& what) {
  return json{{"scenario", what},
              {"configured_scenario", to_string(config.scenario)},
              {"workers", worker_count()},
              {"units", "hbar = 1"},
              {"spacing", config.numerics.spacing},
              {"diff_step", config.numerics.diff_step}};
}

fs::path emit(RunResult& result, const fs::path& out_dir, const std::string& file, const std::string& content,
              const json& meta) {
  const fs::path path = out_dir / file;
  write_atomic(path, content);
  write_metadata(path, meta);
  result.files.push_back(path);
  return path;
}

std::string flags_cell(const std::vector<std::string>& flags) {
  std::string out;
  for (const auto& f : flags) out += (out.empty() ? "" : "|") + f;
  return out;
}

std::string fmt(double x) { return format_number(x); }

json eigenpair_json(const ResonanceEigenpair& e) {
  const auto width = verify_width_dwell(e);
  return json{{"E_R", e.W.real()},
              {"Gamma", e.gamma},
              {"k_fixed", e.k_fixed},
              {"residual", e.residual_norm},
              {"eq10_relative_residual", width.relative_residual}};
}

json failure_json(const SeedFailure& f) {
  return json{{"seed", complex_pair(f.seed)},
              {"last_W", complex_pair(f.last_W)},
              {"residual", f.residual_norm},
              {"reason", f.reason}};
}

// ---- scenario runners -----------------------------------------------------

void run_scatter(const ScenarioConfig& config, const fs::path& out, RunResult& result) {
  for (const auto& m : config.models) {
    const auto energies = m.energy_range.values();
    const double r0 = m.matching_radius();
    const RadialGrid grid = grid_to(r0, config.numerics.spacing);
    std::vector<ScatteringObservables> obs(energies.size());
    parallel_for(energies.size(), [&](std::size_t i) {
      obs[i] = match_scattering(integrate_radial(m.potential, energies[i], m.mass, grid), r0);
    });
    std::vector<double> deltas;
    for (const auto& o : obs) deltas.push_back(o.delta);
    unwrap_phase_shifts(deltas);

    CsvTable table({"E", "k", "delta", "S_re", "S_im", "I_re", "I_im", "abs_S_matrix"});
    for (std::size_t i = 0; i < energies.size(); ++i) {
      const auto& o = obs[i];
      table.add_row({fmt(energies[i]), fmt(o.k), fmt(deltas[i]), fmt(o.S_amp.real()), fmt(o.S_amp.imag()),
                     fmt(o.I_amp.real()), fmt(o.I_amp.imag()), fmt(o.unitarity)});
    }
    emit(result, out, "scatter_" + m.name + ".csv", table.str(), run_metadata(config, "scatter_scan"));
    std::ostringstream line;
    line << "scatter " << m.name << ": " << energies.size() << " energies, delta in [" << fmt(*std::min_element(deltas.begin(), deltas.end()))
         << ", " << fmt(*std::max_element(deltas.begin(), deltas.end())) << "]";
    result.summary.push_back(line.str());
  }
}

void run_dwell(const ScenarioConfig& config, const fs::path& out, RunResult& result) {
  for (const auto& m : config.models) {
    const auto energies = m.energy_range.values();
    std::vector<TimeReport> reports(energies.size());
    const TimeOptions opts = time_options(config.numerics, m.matching_radius());
    parallel_for(energies.size(), [&](std::size_t i) {
      reports[i] = radial_time_report(m.potential, energies[i], m.mass, opts);
    });
    CsvTable table({"E", "tau_dwell", "tau_phase", "tau_free", "dwell_delay", "phase_delay", "self_interference",
                    "flags"});
    double peak = -std::numeric_limits<double>::infinity();
    double peak_e = 0.0;
    for (const auto& r : reports) {
      table.add_row({fmt(r.energy), fmt(r.tau_dwell), fmt(r.tau_phase), fmt(r.tau_free), fmt(r.dwell_delay),
                     fmt(r.phase_delay), fmt(r.self_interference), flags_cell(r.flags)});
      if (r.phase_delay > peak) {
        peak = r.phase_delay;
        peak_e = r.energy;
      }
    }
    emit(result, out, "dwell_" + m.name + ".csv", table.str(), run_metadata(config, "dwell_scan"));
    result.summary.push_back("dwell " + m.name + ": max phase delay " + fmt(peak) + " at E = " + fmt(peak_e));
  }
}

void run_winful(const ScenarioConfig& config, const fs::path& out, RunResult& result) {
  if (!config.barrier) throw ConfigError("config key 'barrier_1d': expected an object (missing)");
  const auto& b = *config.barrier;
  const auto energies = b.energy_range.values();
  std::vector<TimeReport> reports(energies.size());
  const TimeOptions opts = time_options(config.numerics, 0.0);
  parallel_for(energies.size(), [&](std::size_t i) {
    const auto sol = solve_barrier_1d(b.potential, energies[i], b.mass, config.numerics.spacing);
    reports[i] = winful_decomposition_1d(sol, energies[i], b.mass, opts);
  });
  CsvTable table({"E", "tau_dwell", "tau_phase", "tau_free", "dwell_delay", "phase_delay", "self_interference",
                  "interference_term", "identity_residual", "flags"});
  double worst = 0.0;
  int flagged = 0;
  for (const auto& r : reports) {
    table.add_row({fmt(r.energy), fmt(r.tau_dwell), fmt(r.tau_phase), fmt(r.tau_free), fmt(r.dwell_delay),
                   fmt(r.phase_delay), fmt(r.self_interference), fmt(r.interference_term),
                   fmt(r.identity_residual), flags_cell(r.flags)});
    if (r.has_flag("threshold-singular")) {
      ++flagged;
    } else {
      worst = std::max(worst, r.identity_residual);
    }
  }
  emit(result, out, "winful_1d.csv", table.str(), run_metadata(config, "winful_1d"));
  result.summary.push_back("winful_1d: max identity residual " + fmt(worst) + ", " + std::to_string(flagged) +
                           " threshold-singular point(s)");
  if (worst > config.numerics.tolerance("winful_decomposition")) result.exit_code = 2;
}

void run_kp(const ScenarioConfig& config, const fs::path& out, RunResult& result, bool check_width) {
  for (const auto& m : config.models) {
    const auto seeds = model_seeds(m, config.numerics);
    if (seeds.empty()) {
      result.summary.push_back("kp " + m.name + ": no resonance seeds found");
      result.exit_code = 2;
      continue;
    }
    const double r0 = m.matching_radius();
    const auto found = find_kp_eigenvalues(m.potential, m.mass, seeds, r0, grid_to(r0, config.numerics.spacing),
                                           kp_options(config.numerics));
    const double tol = config.numerics.tolerance("width_dwell");
    json pairs = json::array();
    CsvTable table({"E_R", "Gamma", "k_fixed", "residual", "eq10_relative_residual"});
    double worst = 0.0;
    for (const auto& e : found.eigenpairs) {
      const json j = eigenpair_json(e);
      pairs.push_back(j);
      worst = std::max(worst, j["eq10_relative_residual"].get<double>());
      table.add_row({fmt(e.W.real()), fmt(e.gamma), fmt(e.k_fixed), fmt(e.residual_norm),
                     fmt(j["eq10_relative_residual"].get<double>())});
    }
    json failures = json::array();
    for (const auto& f : found.failures) failures.push_back(failure_json(f));
    const std::string stem = (check_width ? "width_dwell_" : "kp_") + m.name;
    if (config.output.format == "json") {
      emit(result, out, stem + ".json", dump_json(json{{"eigenpairs", pairs}, {"failed_seeds", failures}}),
           run_metadata(config, to_string(config.scenario)));
    } else {
      emit(result, out, stem + ".csv", table.str(), run_metadata(config, to_string(config.scenario)));
    }
    std::ostringstream line;
    line << "kp " << m.name << ": " << found.eigenpairs.size() << " eigenvalue(s), " << found.failures.size()
         << " failed seed(s)";
    if (!found.eigenpairs.empty()) line << ", max width-dwell residual " << fmt(worst);
    result.summary.push_back(line.str());
    if (found.eigenpairs.empty()) result.exit_code = 2;
    if (check_width && worst > tol) result.exit_code = 2;
  }
}

struct ThreeBodyRun {
  ThreeBodyModel model;
  ResonanceEigenpair eig_r;
  ResonanceEigenpair eig_rho;
  ThreeBodyReport report;
  ContinuityReport continuity;
};

ThreeBodyRun solve_three_body(const ThreeBodyConfig& c, const Numerics& n) {
  ThreeBodyRun run;
  run.model = build_three_body(c.masses, c.V_r, c.V_rho, c.r_chi, c.rho_phi);
  const auto seeds_r = channel_seeds(c.seeds_r, c.seed_range_r, c.V_r, run.model.mu1, c.r_chi, n);
  const auto seeds_rho = channel_seeds(c.seeds_rho, c.seed_range_rho, c.V_rho, run.model.mu2, c.rho_phi, n);
  auto [eig_r, eig_rho] = solve_subsystems(run.model, seeds_r, seeds_rho, kp_options(n), n.spacing);
  run.eig_r = std::move(eig_r);
  run.eig_rho = std::move(eig_rho);
  run.report = three_body_dwell(run.model, run.eig_r, run.eig_rho);
  run.continuity = continuity_residual(run.eig_r, run.eig_rho);
  return run;
}

json three_body_json(const ThreeBodyReport& r) {
  return json{{"W_chi", complex_pair(r.W_chi)},
              {"W_phi", complex_pair(r.W_phi)},
              {"Gamma_R", r.gamma_R},
              {"tau_R", r.tau_R},
              {"tau_chi", r.tau_chi},
              {"tau_phi", r.tau_phi_sub},
              {"tau_3b", r.tau_3b},
              {"identity_residual", r.identity_residual},
              {"continuity_residual", r.continuity_residual}};
}

void run_three_body(const ScenarioConfig& config, const fs::path& out, RunResult& result) {
  if (config.three_body.empty()) throw ConfigError("config key 'three_body': expected an object (missing)");
  for (const auto& [name, c] : config.three_body) {
    const ThreeBodyRun run = solve_three_body(c, config.numerics);
    emit(result, out, "threebody_" + name + ".json", dump_json(three_body_json(run.report)),
         run_metadata(config, "three_body"));
    result.summary.push_back("threebody " + name + ": tau_3b " + fmt(run.report.tau_3b) + ", 1/Gamma_R " +
                             fmt(run.report.tau_R) + ", identity residual " + fmt(run.report.identity_residual));
    if (run.report.identity_residual > config.numerics.tolerance("reciprocal_addition") ||
        run.report.lifetime_residual > config.numerics.tolerance("lifetime_equivalence")) {
      result.exit_code = 2;
    }
  }
}

// ---- verification -----------------------------------------------------------

class Checks {
 public:
  explicit Checks(const Numerics& numerics) : numerics_(numerics) {}

  void bound(const std::string& name, const std::string& tolerance_key, double value, std::string note = {}) {
    const double tol = numerics_.tolerance(tolerance_key);
    report_.checks.push_back({name, value, tol, std::isfinite(value) && value < tol, std::move(note)});
  }

  void predicate(const std::string& name, double value, bool pass, std::string note) {
    report_.checks.push_back({name, value, 0.0, pass, std::move(note)});
  }

  void not_applicable(const std::string& name, const std::string& tolerance_key, std::string note) {
    report_.checks.push_back({name, std::nullopt, numerics_.tolerance(tolerance_key), std::nullopt, std::move(note)});
  }

  void failed(const std::string& name, const std::string& tolerance_key, std::string note) {
    report_.checks.push_back({name, std::nullopt, numerics_.tolerance(tolerance_key), false, std::move(note)});
  }

  VerificationReport take() { return std::move(report_); }

 private:
  const Numerics& numerics_;
  VerificationReport report_;
};

void verify_model(const ModelConfig& m, const Numerics& n, Checks& checks) {
  const std::string p = m.name + "/";
  const double r0 = m.matching_radius();
  const auto energies = m.energy_range.values();
  const TimeOptions opts = time_options(n, r0);
  const RadialGrid grid = grid_to(r0, n.spacing);
  TimeOptions far = opts;
  far.r0 = 2.0 * r0;

  struct Row {
    double unitarity = 0.0;
    double delta = 0.0;
    double radius_gap = 0.0;
    double log_derivative = 0.0;
    double outgoing = 0.0;
  };
  std::vector<Row> rows(energies.size());
  parallel_for(energies.size(), [&](std::size_t i) {
    const double e = energies[i];
    const auto obs = match_scattering(integrate_radial(m.potential, e, m.mass, grid), r0);
    const double d_far = phase_shift(m.potential, e, m.mass, far);
    const double v = std::sqrt(2.0 * e / m.mass);
    const double phase_delay = phase_time_delay(m.potential, e, m.mass, opts);
    const KpDwell kp = kp_log_derivative_dwell(m.potential, e, m.mass, r0, opts);
    const auto og = outgoing_dwell_equals_phase(m.potential, e, m.mass, r0, opts);
    rows[i] = {std::abs(obs.unitarity - 1.0), obs.delta, std::abs(nearest_branch(d_far - obs.delta, 0.0, std::numbers::pi)),
               std::abs(kp.tau - (phase_delay + r0 / v)), std::abs(og.difference)};
  });
  auto worst = [&](double Row::*field) {
    double w = 0.0;
    for (const auto& r : rows) w = std::max(w, std::abs(r.*field));
    return w;
  };
  checks.bound(p + "unitarity", "unitarity", worst(&Row::unitarity));
  checks.bound(p + "matching_radius_independence", "matching_radius_independence", worst(&Row::radius_gap));
  if (m.potential.is_zero()) {
    checks.bound(p + "phase_shift_zero", "phase_shift_zero", worst(&Row::delta));
  }
  checks.bound(p + "log_derivative_dwell", "log_derivative_dwell", worst(&Row::log_derivative));
  checks.bound(p + "outgoing_dwell", "outgoing_dwell", worst(&Row::outgoing));

  // Free passage over [0, r0] at the scan midpoint.
  {
    const double e = mid_energy(m.energy_range);
    const auto free = solve_barrier_1d(PotentialSpec::rectangular_barrier(0.0, r0), e, m.mass, n.spacing);
    const double tau = dwell_time(sampled_field(free), {0.0, r0}, free.incident_flux()).tau;
    const double expected = m.mass * r0 / free.k;
    checks.bound(p + "free_particle_anchor", "free_particle_anchor", std::abs(tau / expected - 1.0));
  }

  {
    const double e = mid_energy(m.energy_range);
    const auto smith = smith_identity_residual(m.potential, e, m.mass, grid, n.diff_step);
    checks.bound(p + "smith_identity", "smith_identity", smith.max_norm);
    checks.bound(p + "smith_integrated", "smith_integrated",
                 std::abs(smith.integrated_density - smith.boundary_term));
  }

  const auto seeds = model_seeds(m, n);
  if (seeds.empty()) {
    checks.not_applicable(p + "kp_boundary_residual", "kp_boundary_residual", "not applicable: no resonance seeds");
    checks.not_applicable(p + "width_dwell", "width_dwell", "not applicable: no resonance seeds");
    return;
  }
  const auto found = find_kp_eigenvalues(m.potential, m.mass, seeds, r0, grid, kp_options(n));
  if (found.eigenpairs.empty()) {
    const std::string note = "no seed converged (" + found.failures.front().reason + ")";
    checks.failed(p + "kp_boundary_residual", "kp_boundary_residual", note);
    checks.failed(p + "width_dwell", "width_dwell", note);
    return;
  }
  double d_worst = 0.0;
  double width_worst = 0.0;
  bool physical = true;
  for (const auto& e : found.eigenpairs) {
    const auto w = verify_width_dwell(e);
    d_worst = std::max(d_worst, e.residual_norm);
    width_worst = std::max(width_worst, w.relative_residual);
    physical = physical && !w.nonphysical;
  }
  const std::string count = std::to_string(found.eigenpairs.size()) + " eigenpair(s)";
  checks.bound(p + "kp_boundary_residual", "kp_boundary_residual", d_worst, count);
  checks.bound(p + "width_dwell", "width_dwell", physical ? width_worst : std::nan(""),
               physical ? count : "nonphysical current at r0");
}

void verify_barrier(const BarrierConfig& b, const Numerics& n, Checks& checks) {
  const auto energies = b.energy_range.values();
  const TimeOptions opts = time_options(n, 0.0);
  std::vector<double> flux(energies.size());
  std::vector<double> residual(energies.size(), 0.0);
  parallel_for(energies.size(), [&](std::size_t i) {
    const auto sol = solve_barrier_1d(b.potential, energies[i], b.mass, n.spacing);
    flux[i] = std::abs(std::norm(sol.R) + std::norm(sol.T) - 1.0);
    if (energies[i] >= n.e_min) residual[i] = winful_decomposition_1d(sol, energies[i], b.mass, opts).identity_residual;
  });
  checks.bound("barrier_1d/flux_conservation", "flux_conservation", *std::max_element(flux.begin(), flux.end()));
  checks.bound("barrier_1d/winful_decomposition", "winful_decomposition", *std::max_element(residual.begin(), residual.end()));

  const double e_low = 0.2 * n.e_min;
  const auto low = solve_barrier_1d(b.potential, e_low, b.mass, n.spacing);
  const auto r = winful_decomposition_1d(low, e_low, b.mass, opts);
  checks.predicate("barrier_1d/threshold_flag", std::abs(r.interference_term) / r.tau_dwell,
                   r.has_flag("threshold-singular"),
                   "|interference| / tau_D at E = " + fmt(e_low) + "; must be flagged threshold-singular");
}

void verify_three_body(const std::string& name, const ThreeBodyConfig& c, const Numerics& n, Checks& checks) {
  const std::string p = name + "/";
  ThreeBodyRun run;
  try {
    run = solve_three_body(c, n);
  } catch (const PhysicsError& e) {
    for (const char* key : {"reciprocal_addition", "lifetime_equivalence", "factorization", "continuity_integrated"}) {
      checks.failed(p + key, key, e.what());
    }
    return;
  }
  const auto& r = run.report;
  checks.bound(p + "reciprocal_addition", "reciprocal_addition", r.identity_residual);
  checks.bound(p + "lifetime_equivalence", "lifetime_equivalence", r.lifetime_residual);
  const auto width = three_body_width(run.eig_r, run.eig_rho);
  checks.bound(p + "width_current_ratio", "lifetime_equivalence", std::abs(width.gamma_currents / width.gamma_R - 1.0));
  checks.bound(p + "factorization", "factorization", r.factorization_residual);
  checks.bound(p + "continuity_integrated", "continuity_integrated",
               std::max(run.continuity.integrated_r, run.continuity.integrated_rho));

  ThreeBodyModel swapped = run.model;
  std::swap(swapped.V_r, swapped.V_rho);
  std::swap(swapped.r_chi, swapped.rho_phi);
  const auto mirrored = three_body_dwell(swapped, run.eig_rho, run.eig_r);
  checks.predicate(p + "exchange_symmetry", std::abs(mirrored.tau_3b - r.tau_3b), mirrored.tau_3b == r.tau_3b,
                   "swapping channels must leave tau_3b unchanged bit for bit");
  const double shortest = std::min(r.tau_chi, r.tau_phi_sub);
  checks.predicate(p + "monotonicity", r.tau_3b / shortest, r.tau_3b < shortest,
                   "tau_3b / min(tau_chi, tau_phi) must be below 1");
}

}  // namespace

// ---- public API -------------------------------------------------------------

std::string to_string(Scenario scenario) {
  for (const auto& [s, name] : kScenarioNames) {
    if (s == scenario) return name;
  }
  return "unknown";
}

Scenario scenario_from_string(const std::string& name) {
  for (const auto& [s, n] : kScenarioNames) {
    if (name == n) return s;
  }
  throw ConfigError("config key 'scenario': expected one of scatter_scan, dwell_scan, winful_1d, kp_find, "
                    "verify_eq10, three_body, identity_suite (got '" + name + "')");
}

std::vector<double> EnergyRange::values() const {
  std::vector<double> e(n);
  for (int i = 0; i < n; ++i) e[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return e;
}

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> tolerances{
      {"unitarity", 1e-10},
      {"matching_radius_independence", 1e-9},
      {"phase_shift_zero", 1e-10},
      {"free_particle_anchor", 1e-8},
      {"log_derivative_dwell", 1e-6},
      {"outgoing_dwell", 1e-6},
      {"smith_identity", 1e-5},
      {"smith_integrated", 1e-6},
      {"kp_boundary_residual", 1e-10},
      {"width_dwell", 1e-8},
      {"flux_conservation", 1e-10},
      {"winful_decomposition", 1e-6},
      {"reciprocal_addition", 1e-8},
      {"lifetime_equivalence", 1e-8},
      {"factorization", 1e-9},
      {"continuity_integrated", 1e-8},
  };
  return tolerances;
}

double Numerics::tolerance(const std::string& name) const {
  if (auto it = tolerances.find(name); it != tolerances.end()) return it->second;
  return default_tolerances().at(name);
}

ScenarioConfig parse_config(const json& doc) {
  if (!doc.is_object()) schema_error("<root>", "an object");
  check_keys(doc, "",
             {"scenario", "models", "potential", "mass", "r0", "energy_range", "seeds", "name", "barrier_1d",
              "three_body", "numerics", "output"});
  ScenarioConfig config;
  const json& scenario = member(doc, "scenario", "");
  if (!scenario.is_string()) schema_error("scenario", "a string");
  config.scenario = scenario_from_string(scenario.get<std::string>());

  if (doc.contains("models")) {
    const json& models = doc.at("models");
    if (!models.is_array()) schema_error("models", "an array of model objects");
    for (std::size_t i = 0; i < models.size(); ++i) {
      config.models.push_back(model_at(models[i], "models[" + std::to_string(i) + "]", "model" + std::to_string(i)));
    }
  }
  if (doc.contains("potential")) {
    json single = json::object();
    for (const char* key : {"name", "potential", "mass", "r0", "energy_range", "seeds"}) {
      if (doc.contains(key)) single[key] = doc.at(key);
    }
    config.models.push_back(model_at(single, "", "model"));
  }
  for (std::size_t i = 0; i < config.models.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (config.models[i].name == config.models[j].name) {
        throw ConfigError("config key 'models[" + std::to_string(i) + "].name': duplicate name '" +
                          config.models[i].name + "'");
      }
    }
  }

  if (doc.contains("barrier_1d")) {
    const json& b = doc.at("barrier_1d");
    if (!b.is_object()) schema_error("barrier_1d", "an object");
    check_keys(b, "barrier_1d", {"potential", "mass", "energy_range"});
    BarrierConfig bc;
    bc.potential = potential_at(member(b, "potential", "barrier_1d"), "barrier_1d.potential");
    bc.mass = optional_positive(b, "mass", "barrier_1d", 1.0);
    bc.energy_range = range_at(member(b, "energy_range", "barrier_1d"), "barrier_1d.energy_range");
    config.barrier = bc;
  }

  if (doc.contains("three_body")) {
    const json& tb = doc.at("three_body");
    if (tb.is_object()) {
      const std::string name = tb.contains("name") ? name_at(tb.at("name"), "three_body.name") : "three_body";
      config.three_body.emplace_back(name, three_body_at(tb, "three_body"));
    } else if (tb.is_array()) {
      for (std::size_t i = 0; i < tb.size(); ++i) {
        const std::string path = "three_body[" + std::to_string(i) + "]";
        if (!tb[i].is_object()) schema_error(path, "an object");
        const std::string name =
            tb[i].contains("name") ? name_at(tb[i].at("name"), path + ".name") : "three_body" + std::to_string(i);
        config.three_body.emplace_back(name, three_body_at(tb[i], path));
      }
    } else {
      schema_error("three_body", "an object or an array of objects");
    }
  }

  if (doc.contains("numerics")) {
    const json& n = doc.at("numerics");
    if (!n.is_object()) schema_error("numerics", "an object");
    check_keys(n, "numerics", {"spacing", "diff_step", "e_min", "k_mode", "k_fixed", "seed_scan_points", "tolerances"});
    auto& num = config.numerics;
    num.spacing = optional_positive(n, "spacing", "numerics", num.spacing);
    num.diff_step = optional_positive(n, "diff_step", "numerics", num.diff_step);
    num.e_min = optional_positive(n, "e_min", "numerics", num.e_min);
    if (n.contains("k_mode")) {
      if (!n.at("k_mode").is_string()) schema_error("numerics.k_mode", "a string");
      try {
        num.k_mode = k_mode_from_string(n.at("k_mode").get<std::string>());
      } catch (const ConfigError&) {
        schema_error("numerics.k_mode", "\"self_consistent\" or \"probe\"");
      }
    }
    num.k_fixed = n.contains("k_fixed") ? positive(n.at("k_fixed"), "numerics.k_fixed") : 0.0;
    if (num.k_mode == KMode::probe && !(num.k_fixed > 0.0)) schema_error("numerics.k_fixed", "a positive number in probe mode");
    if (n.contains("seed_scan_points")) {
      const json& s = n.at("seed_scan_points");
      if (!s.is_number_integer() || s.get<long>() < 3) schema_error("numerics.seed_scan_points", "an integer >= 3");
      num.seed_scan_points = s.get<int>();
    }
    if (n.contains("tolerances")) {
      const json& t = n.at("tolerances");
      if (!t.is_object()) schema_error("numerics.tolerances", "an object of positive numbers");
      for (const auto& [key, value] : t.items()) {
        if (!default_tolerances().count(key)) throw ConfigError("config key 'numerics.tolerances." + key + "': unknown tolerance");
        num.tolerances[key] = positive(value, "numerics.tolerances." + key);
      }
    }
  }

  if (doc.contains("output")) {
    const json& o = doc.at("output");
    if (!o.is_object()) schema_error("output", "an object");
    check_keys(o, "output", {"path", "format"});
    if (o.contains("path")) {
      if (!o.at("path").is_string()) schema_error("output.path", "a string");
      config.output.path = o.at("path").get<std::string>();
    }
    if (o.contains("format")) {
      const json& f = o.at("format");
      if (!f.is_string() || (f.get<std::string>() != "csv" && f.get<std::string>() != "json")) {
        schema_error("output.format", "\"csv\" or \"json\"");
      }
      config.output.format = f.get<std::string>();
    }
  }
  return config;
}

ScenarioConfig load_config(const fs::path& path) { return parse_config(read_json_file(path)); }

bool VerificationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.pass || *c.pass; });
}

json VerificationReport::to_json() const {
  json out = json::object();
  for (const auto& c : checks) {
    json entry{{"tolerance", c.tolerance}};
    entry["value"] = c.value ? json(*c.value) : json(nullptr);
    if (c.pass) {
      entry["pass"] = *c.pass;
    } else {
      entry["pass"] = nullptr;
      entry["status"] = "not applicable";
    }
    if (!c.note.empty()) entry["note"] = c.note;
    out[c.name] = entry;
  }
  return out;
}

VerificationReport verify_all(const ScenarioConfig& config) {
  if (config.models.empty() && !config.barrier && config.three_body.empty()) {
    throw ConfigError("config key 'models': expected at least one model, barrier_1d or three_body entry");
  }
  Checks checks(config.numerics);
  for (const auto& m : config.models) verify_model(m, config.numerics, checks);
  if (config.barrier) verify_barrier(*config.barrier, config.numerics, checks);
  for (const auto& [name, c] : config.three_body) verify_three_body(name, c, config.numerics, checks);
  return checks.take();
}

RunResult run_verification(const ScenarioConfig& config, const fs::path& out_dir, const std::string& stem) {
  RunResult result;
  const VerificationReport report = verify_all(config);
  if (config.output.format == "csv") {
    CsvTable table({"check", "value", "tolerance", "pass"});
    for (const auto& c : report.checks) {
      table.add_row({c.name, c.value ? fmt(*c.value) : "", fmt(c.tolerance),
                     c.pass ? (*c.pass ? "true" : "false") : "not applicable"});
    }
    emit(result, out_dir, stem + ".csv", table.str(), run_metadata(config, "verify"));
  } else {
    emit(result, out_dir, stem + ".json", dump_json(report.to_json()), run_metadata(config, "verify"));
  }
  for (const auto& c : report.checks) {
    const std::string status = !c.pass ? "SKIP" : (*c.pass ? "PASS" : "FAIL");
    result.summary.push_back(status + " " + c.name + " value=" + (c.value ? fmt(*c.value) : "n/a") +
                             " tol=" + fmt(c.tolerance) + (c.note.empty() ? "" : " (" + c.note + ")"));
  }
  result.exit_code = report.all_passed() ? 0 : 2;
  return result;
}

RunResult run_scenario(const ScenarioConfig& config, const fs::path& out_dir) {
  RunResult result;
  const bool needs_models = config.scenario == Scenario::scatter_scan || config.scenario == Scenario::dwell_scan ||
                            config.scenario == Scenario::kp_find || config.scenario == Scenario::verify_eq10;
  if (needs_models && config.models.empty()) {
    throw ConfigError("config key 'models': expected at least one model for " + to_string(config.scenario));
  }
  switch (config.scenario) {
    case Scenario::scatter_scan:
      run_scatter(config, out_dir, result);
      break;
    case Scenario::dwell_scan:
      run_dwell(config, out_dir, result);
      break;
    case Scenario::winful_1d:
      run_winful(config, out_dir, result);
      break;
    case Scenario::kp_find:
      run_kp(config, out_dir, result, false);
      break;
    case Scenario::verify_eq10:
      run_kp(config, out_dir, result, true);
      break;
    case Scenario::three_body:
      run_three_body(config, out_dir, result);
      break;
    case Scenario::identity_suite:
      return run_verification(config, out_dir, "identity_suite");
  }
  return result;
}

fs::path dump_wave(const ModelConfig& model, const Numerics& numerics, double energy, const fs::path& out_dir) {
  const double r0 = model.matching_radius();
  const RadialGrid grid = grid_to(r0, numerics.spacing);
  const auto sol = integrate_radial(model.potential, energy, model.mass, grid);
  const auto wave = unit_flux_wave(sol, match_scattering(sol, r0));
  CsvTable table({"r", "re_phi", "im_phi"});
  for (Index i = 0; i < grid.size(); ++i) {
    table.add_row({fmt(grid[i]), fmt(wave.values(i).real()), fmt(wave.values(i).imag())});
  }
  const fs::path path = out_dir / ("wave_" + model.name + ".csv");
  write_atomic(path, table.str());
  write_metadata(path, json{{"model", model.name}, {"energy", energy}, {"normalization", "unit incident flux"}});
  return path;
}

}  // namespace dwelltime
