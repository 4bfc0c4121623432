#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dwelltime/errors.hpp"
#include "dwelltime/io.hpp"
#include "dwelltime/scenario.hpp"

using namespace dwelltime;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dwelltime_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Shell {
  int code;
  std::string out;
};

Shell run_cli(const std::string& args) {
  const fs::path log = scratch("cli_log") / "out.txt";
  const std::string cmd = std::string(DWELLTIME_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read(log)};
}

json small_model(double depth) {
  return json{{"name", "m"},
              {"potential", {{"kind", "square_well"}, {"params", {{"V0", depth}, {"a", 1.0}}}}},
              {"mass", 1.0},
              {"energy_range", {0.1, 8.0, 40}}};
}

std::string config_error(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const std::string kConfigs = DWELLTIME_CONFIG_DIR;

}  // namespace

TEST_CASE("schema errors name the key and the expected type") {
  json doc{{"scenario", "scatter_scan"}, {"models", json::array({small_model(10.0)})}};
  CHECK(parse_config(doc).models.size() == 1);

  auto bad = doc;
  bad["models"][0]["mass"] = "heavy";
  CHECK(config_error(bad).find("models[0].mass") != std::string::npos);
  CHECK(config_error(bad).find("number") != std::string::npos);

  bad = doc;
  bad["models"][0]["energy_range"] = {8.0, 0.1, 10};
  CHECK(config_error(bad).find("models[0].energy_range") != std::string::npos);

  bad = doc;
  bad["numerics"] = {{"tolerances", {{"width_dwell", -1.0}}}};
  CHECK(config_error(bad).find("numerics.tolerances.width_dwell") != std::string::npos);

  bad = doc;
  bad["scenario"] = "everything";
  CHECK(config_error(bad).find("scenario") != std::string::npos);

  bad = doc;
  bad["models"][0]["potential"]["kind"] = 3;
  CHECK(config_error(bad).find("models[0].potential.kind") != std::string::npos);

  bad = doc;
  bad["colour"] = "blue";
  CHECK(config_error(bad).find("colour") != std::string::npos);

  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("single-potential shorthand and defaults") {
  const json doc{{"scenario", "dwell_scan"},
                 {"potential", {{"kind", "gaussian"}, {"params", {{"V0", 1.0}, {"sigma", 0.5}}}, {"support_radius", 2.0}}},
                 {"energy_range", {0.5, 1.0, 3}}};
  const auto c = parse_config(doc);
  REQUIRE(c.models.size() == 1);
  CHECK(c.models[0].matching_radius() == 2.0);
  CHECK(c.numerics.tolerance("width_dwell") == 1e-8);
  CHECK(c.output.format == "csv");
}

TEST_CASE("scatter scan on V=0 writes zero phase shifts") {
  json doc{{"scenario", "scatter_scan"}, {"models", json::array({small_model(0.0)})}};
  const fs::path out = scratch("scatter");
  const auto r = run_scenario(parse_config(doc), out);
  CHECK(r.exit_code == 0);
  std::istringstream csv(read(out / "scatter_m.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line.rfind("E,k,delta", 0) == 0);
  int rows = 0;
  while (std::getline(csv, line)) {
    std::istringstream cells(line);
    std::string e, k, delta;
    std::getline(cells, e, ',');
    std::getline(cells, k, ',');
    std::getline(cells, delta, ',');
    CHECK(std::abs(std::stod(delta)) < 1e-10);
    ++rows;
  }
  CHECK(rows == 40);
  CHECK(fs::exists(out / "scatter_m.csv.meta.json"));
  for (const auto& entry : fs::directory_iterator(out)) {
    CHECK(entry.path().filename().string().find(".tmp") == std::string::npos);
  }
}

TEST_CASE("kp_find without seeds exits 2") {
  json doc{{"scenario", "kp_find"}, {"models", json::array({small_model(0.0)})}};
  const auto r = run_scenario(parse_config(doc), scratch("kp_empty"));
  CHECK(r.exit_code == 2);
  REQUIRE_FALSE(r.summary.empty());
  CHECK(r.summary.front().find("no resonance seeds found") != std::string::npos);
}

TEST_CASE("free model: anchor passes, resonance checks not applicable") {
  const auto report = verify_all(load_config(kConfigs + "/free_particle.json"));
  CHECK(report.all_passed());
  bool anchor = false;
  bool skipped = false;
  for (const auto& c : report.checks) {
    if (c.name == "free/free_particle_anchor") anchor = c.pass.value_or(false);
    if (c.name == "free/width_dwell") skipped = !c.pass.has_value() && c.note.find("not applicable") != std::string::npos;
  }
  CHECK(anchor);
  CHECK(skipped);
  const json j = report.to_json();
  CHECK(j["free/width_dwell"]["status"] == "not applicable");
}

TEST_CASE("regression suite passes and the coarse grid fails the width check") {
  const auto report = verify_all(load_config(kConfigs + "/regression.json"));
  for (const auto& c : report.checks) {
    INFO(c.name);
    CHECK(c.pass.value_or(true));
  }
  const auto coarse = verify_all(load_config(kConfigs + "/coarse.json"));
  bool failed = false;
  for (const auto& c : coarse.checks) {
    if (c.name == "square_well/width_dwell") {
      failed = c.pass.has_value() && !*c.pass && c.value.has_value() && *c.value > c.tolerance;
    }
  }
  CHECK(failed);
  CHECK_FALSE(coarse.all_passed());
}

TEST_CASE("number formatting is fixed") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(-2.5e-300) == "-2.5e-300");
  CHECK(format_number(1.0 / 3.0) == "0.33333333333333331");
  CHECK(format_number(0.0) == "0");
}

TEST_CASE("cli exit codes and help") {
  const auto help = run_cli("--help");
  CHECK(help.code == 0);
  CHECK(help.out.find("hbar = 1") != std::string::npos);
  CHECK(run_cli("scatter --config /nonexistent.json").code == 1);

  const fs::path dir = scratch("cli_cfg");
  std::ofstream(dir / "bad.json") << R"({"scenario": "scatter_scan", "models": [{"potential": {"kind": "square_well"}}]})";
  const auto bad = run_cli("scatter --config " + (dir / "bad.json").string());
  CHECK(bad.code == 1);
  CHECK(bad.out.find("models[0]") != std::string::npos);

  std::ofstream(dir / "free.json") << json{{"scenario", "kp_find"}, {"models", json::array({small_model(0.0)})}}.dump();
  const auto kp = run_cli("kp --config " + (dir / "free.json").string() + " --out " + (dir / "out").string());
  CHECK(kp.code == 2);
  CHECK(kp.out.find("no resonance seeds found") != std::string::npos);

  const auto coarse = run_cli("verify --config " + kConfigs + "/coarse.json --out " + (dir / "coarse").string());
  CHECK(coarse.code == 2);
  CHECK(coarse.out.find("FAIL square_well/width_dwell") != std::string::npos);
}
