// Command-line front end. All quantities use hbar = 1: energies E = k^2 / 2m,
// times in (length * mass / momentum) units.
#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "dwelltime/errors.hpp"
#include "dwelltime/scenario.hpp"

namespace {

using dwelltime::Scenario;

struct Command {
  std::string name;
  std::optional<Scenario> scenario;  // empty: the scenario named in the config
  const char* help;
};

int execute(const std::string& command, std::optional<Scenario> scenario, const std::string& config_path,
            const std::string& out_override, std::optional<double> wave_energy) {
  dwelltime::ScenarioConfig config = dwelltime::load_config(config_path);
  if (scenario) config.scenario = *scenario;
  const std::filesystem::path out = out_override.empty() ? config.output.path : out_override;

  dwelltime::RunResult result = command == "verify" ? dwelltime::run_verification(config, out)
                                                    : dwelltime::run_scenario(config, out);
  if (wave_energy) {
    if (config.models.empty()) throw dwelltime::ConfigError("--dump-wave needs a radial model in the config");
    for (const auto& m : config.models) {
      result.files.push_back(dwelltime::dump_wave(m, config.numerics, *wave_energy, out));
    }
  }
  for (const auto& line : result.summary) std::cout << line << '\n';
  for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dwell, phase and resonance times for short-range scattering (hbar = 1)."};
  app.require_subcommand(1);
  app.footer(
      "Units: hbar = 1, so E = k^2/2m and the phase delay is 2 d(delta)/dE.\n"
      "Exit status: 0 success, 1 configuration or resolution error, 2 physics failure\n"
      "(failed check, no seeds, no convergence, nonphysical state).");

  const std::vector<Command> commands{
      {"scatter", Scenario::scatter_scan, "Phase shifts and matching amplitudes over the energy range"},
      {"dwell", Scenario::dwell_scan, "Dwell, phase and free times over the energy range"},
      {"winful1d", Scenario::winful_1d, "1D barrier decomposition tau_phase = tau_dwell + interference"},
      {"kp", Scenario::kp_find, "Complex resonance energies from the outgoing-wave condition"},
      {"threebody", Scenario::three_body, "Factorized three-body dwell time and width"},
      {"verify", std::nullopt, "Run every identity check and write the pass/fail report"},
      {"run", std::nullopt, "Run the scenario named in the config file"},
  };

  std::string config_path;
  std::string out_dir;
  std::optional<double> wave_energy;
  std::string chosen;
  std::optional<Scenario> chosen_scenario;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "JSON scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (default: output.path from the config)");
    if (c.name != "verify") {
      sub->add_option("--dump-wave", wave_energy, "Also write phi(r) at this energy for each radial model")
          ->check(CLI::PositiveNumber);
    }
    sub->callback([&chosen, &chosen_scenario, c] {
      chosen = c.name;
      chosen_scenario = c.scenario;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    return execute(chosen, chosen_scenario, config_path, out_dir, wave_energy);
  } catch (const dwelltime::PhysicsError& e) {
    std::cerr << "physics error: " << e.what() << '\n';
    return 2;
  } catch (const dwelltime::ResolutionError& e) {
    std::cerr << "resolution error: " << e.what() << '\n';
    return 1;
  } catch (const dwelltime::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
