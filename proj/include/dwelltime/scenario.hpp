#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dwelltime/kp_resonance.hpp"
#include "dwelltime/potential.hpp"
#include "dwelltime/types.hpp"

namespace dwelltime {

enum class Scenario { scatter_scan, dwell_scan, winful_1d, kp_find, verify_eq10, three_body, identity_suite };

std::string to_string(Scenario scenario);
Scenario scenario_from_string(const std::string& name);

struct EnergyRange {
  double lo = 0.0;
  double hi = 0.0;
  int n = 1;

  std::vector<double> values() const;
};

struct ModelConfig {
  std::string name;
  PotentialSpec potential;
  double mass = 1.0;
  double r0 = 0.0;  // 0 selects the support radius
  EnergyRange energy_range;
  std::vector<Complex> seeds;  // explicit K-P seeds; empty means scan energy_range

  double matching_radius() const { return r0 > 0.0 ? r0 : potential.support_radius(); }
};

struct BarrierConfig {
  PotentialSpec potential;
  double mass = 1.0;
  EnergyRange energy_range;
};

struct ThreeBodyConfig {
  std::array<double, 3> masses{1.0, 1.0, 1.0};
  PotentialSpec V_r;
  PotentialSpec V_rho;
  double r_chi = 0.0;
  double rho_phi = 0.0;
  std::vector<Complex> seeds_r;
  std::vector<Complex> seeds_rho;
  std::optional<EnergyRange> seed_range_r;
  std::optional<EnergyRange> seed_range_rho;
};

struct Numerics {
  double spacing = 1e-3;
  double diff_step = 1e-4;  // h / E
  double e_min = 0.05;
  KMode k_mode = KMode::self_consistent;
  double k_fixed = 0.0;
  int seed_scan_points = 100;
  std::map<std::string, double> tolerances;  // defaults filled by parse_config

  double tolerance(const std::string& name) const;
};

struct OutputConfig {
  std::string path = "results";
  std::string format = "csv";  // csv | json
};

struct ScenarioConfig {
  Scenario scenario = Scenario::identity_suite;
  std::vector<ModelConfig> models;
  std::optional<BarrierConfig> barrier;
  std::vector<std::pair<std::string, ThreeBodyConfig>> three_body;
  Numerics numerics;
  OutputConfig output;
};

// Default tolerance for every named check.
const std::map<std::string, double>& default_tolerances();

// Schema errors are ConfigError with the offending key path and expected type.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::filesystem::path& path);

struct CheckResult {
  std::string name;
  std::optional<double> value;  // empty when not applicable
  double tolerance = 0.0;
  std::optional<bool> pass;  // empty when not applicable
  std::string note;
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  bool all_passed() const;
  nlohmann::json to_json() const;
};

// Runs every identity check against the configured models.
VerificationReport verify_all(const ScenarioConfig& config);

struct RunResult {
  int exit_code = 0;  // 0 success, 2 physics-level failure
  std::vector<std::string> summary;
  std::vector<std::filesystem::path> files;
};

// Executes config.scenario, writing data files under out_dir.
RunResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir);

// Writes the verification report (JSON or CSV per config.output.format).
RunResult run_verification(const ScenarioConfig& config, const std::filesystem::path& out_dir,
                           const std::string& stem = "verify_report");

// phi on the scan grid at one energy, columns r, Re phi, Im phi.
std::filesystem::path dump_wave(const ModelConfig& model, const Numerics& numerics, double energy,
                                const std::filesystem::path& out_dir);

}  // namespace dwelltime
