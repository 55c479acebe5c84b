#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "robust_etc/commands.hpp"
#include "robust_etc/config.hpp"
#include "robust_etc/io.hpp"

using namespace robust_etc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kConfigs = ROBUST_ETC_CONFIG_DIR;
const std::string kCli = ROBUST_ETC_CLI_PATH;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("robust_etc_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = kCli + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json section4_doc() { return to_json(load_config(kConfigs / "section4.json")); }

void expect_config_error(const json& doc, const std::string& field) {
  try {
    parse_config(doc);
    FAIL("expected ConfigError naming " << field);
  } catch (const ConfigError& e) {
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring(field));
  }
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

std::size_t count_fields(const std::string& line) {
  return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

}  // namespace

TEST_CASE("scaffold config round-trips", "[cli]") {
  const ExperimentConfig c = scaffold_config();
  CHECK(parse_config(to_json(c)) == c);
  CHECK(parse_config(json::parse(dump_json(to_json(c)))) == c);

  const fs::path dir = scratch("scaffold");
  REQUIRE(run_cli("scaffold --out " + dir.string(), dir / "log") == 0);
  CHECK(load_config(dir / "config.json") == c);
}

TEST_CASE("shipped configs parse and round-trip", "[cli]") {
  for (const char* name : {"section4.json", "section4_p07.json", "scalar_golden.json",
                           "feasible_demo.json"}) {
    const ExperimentConfig c = load_config(kConfigs / name);
    CHECK(parse_config(to_json(c)) == c);
  }
}

TEST_CASE("config defaults", "[cli]") {
  json doc = section4_doc();
  doc["simulation"].erase("N");
  doc["simulation"].erase("seed");
  doc["simulation"].erase("policy");
  doc["simulation"].erase("mu");
  doc.erase("verification");
  const ExperimentConfig c = parse_config(doc);
  CHECK(c.simulation.steps == 20);
  CHECK(c.simulation.seed == 0);
  CHECK(c.simulation.policy == PolicyKind::kEvent);
  CHECK_FALSE(c.simulation.mu);
  CHECK(c.verification.samples == 1000);
  CHECK(c.verification.grid_points == 101);
}

TEST_CASE("config errors name the offending field", "[cli]") {
  json doc = section4_doc();
  doc["params"]["gamma"] = 1.0;
  expect_config_error(doc, "params.gamma");

  doc = section4_doc();
  doc["system"]["B"] = json::array({json::array({0.0}), json::array({1.0}), json::array({2.0})});
  expect_config_error(doc, "system.B");

  doc = section4_doc();
  doc["params"]["R1"] = json::array({json::array({1.0, 0.0}), json::array({0.0, 1.0})});
  expect_config_error(doc, "params.R1");

  doc = section4_doc();
  doc["params"]["sigma"] = 1.5;
  expect_config_error(doc, "params.sigma");

  doc = section4_doc();
  doc["simulation"]["x0"] = json::array({1.0});
  expect_config_error(doc, "simulation.x0");

  doc = section4_doc();
  doc["simulation"]["p_trajectory"] = {{"kind", "spiral"}};
  expect_config_error(doc, "simulation.p_trajectory.kind");

  doc = section4_doc();
  doc["system"]["uncertainty"]["F"] = json::array({json::array({1.0, 0.0}), json::array({0.0, -1.0})});
  expect_config_error(doc, "system.uncertainty.F");

  doc = section4_doc();
  doc["schema_version"] = 2;
  expect_config_error(doc, "schema_version");

  doc = section4_doc();
  doc["system"]["A"][0][0] = "x";
  expect_config_error(doc, "system.A[0][0]");

  doc = section4_doc();
  doc.erase("params");
  expect_config_error(doc, "params");

  // No field lets a config null the controller.
  doc = section4_doc();
  doc["params"]["K"] = json::array({json::array({0.0, 0.0})});
  expect_config_error(doc, "params.K");
}

TEST_CASE("CLI exit codes", "[cli]") {
  const fs::path dir = scratch("exit");
  const std::string s4 = (kConfigs / "section4.json").string();
  const std::string demo = (kConfigs / "feasible_demo.json").string();
  const std::string out = " --out " + dir.string();

  CHECK(run_cli("synth --config " + demo + out, dir / "log") == 0);
  CHECK(run_cli("verify --config " + demo + out, dir / "log") == 0);
  CHECK(run_cli("simulate --config " + s4 + out, dir / "log") == 0);
  CHECK(run_cli("compare --config " + s4 + out, dir / "log") == 0);

  // The example instance violates (14): synth still writes the artifact.
  CHECK(run_cli("synth --config " + s4 + out, dir / "log") == 3);
  CHECK(fs::exists(dir / "synth.json"));
  CHECK_THAT(slurp(dir / "log"), Catch::Matchers::ContainsSubstring("(14)"));
  CHECK(run_cli("verify --config " + s4 + out, dir / "log") == 4);

  ExperimentConfig eps1 = load_config(s4);
  eps1.params.epsilon = 1.0;
  write_text_file(dir / "eps1.json", dump_json(to_json(eps1)));
  CHECK(run_cli("synth --config " + (dir / "eps1.json").string() + out, dir / "log") == 3);
  CHECK_THAT(slurp(dir / "log"), Catch::Matchers::ContainsSubstring("(14)"));

  json bad = section4_doc();
  bad["params"]["bogus"] = 1;
  write_text_file(dir / "bad.json", bad.dump());
  CHECK(run_cli("synth --config " + (dir / "bad.json").string() + out, dir / "log") == 2);
  CHECK_THAT(slurp(dir / "log"), Catch::Matchers::ContainsSubstring("params.bogus"));

  write_text_file(dir / "broken.json", "{ not json");
  CHECK(run_cli("synth --config " + (dir / "broken.json").string() + out, dir / "log") == 2);
  CHECK(run_cli("synth", dir / "log") == 2);
}

TEST_CASE("synth summary for the example instance", "[cli]") {
  const fs::path dir = scratch("synth");
  const CommandResult r = run_synth(load_config(kConfigs / "section4.json"), dir);
  CHECK(r.exit_code == kExitNumericalFailure);
  const json doc = json::parse(slurp(dir / "synth.json"));
  CHECK(std::abs(doc["K"][0][0].get<double>() + 0.9687) <= 1e-3);
  CHECK(std::abs(doc["K"][0][1].get<double>() + 0.0001) <= 1e-3);
  CHECK(doc["mu1"].is_null());
  CHECK(doc["failure"]["condition"] == "14");
  CHECK(doc["mu1_formula_value"].is_number());
}

TEST_CASE("A = 0 reports P = Q + F + beta^2 I and K = 0", "[cli]") {
  ExperimentConfig c = load_config(kConfigs / "feasible_demo.json");
  c.system.A = Matrix(2, 2);
  const fs::path dir = scratch("zeroA");
  run_synth(c, dir);
  const json doc = json::parse(slurp(dir / "synth.json"));
  CHECK(doc["P"] == json::parse("[[6.0, 0.0], [0.0, 6.0]]"));
  CHECK(doc["K"] == json::parse("[[0.0, 0.0]]"));
}

TEST_CASE("trace CSV layout", "[cli]") {
  const fs::path dir = scratch("csv");
  ExperimentConfig c = load_config(kConfigs / "section4.json");
  REQUIRE(run_simulate(c, dir).exit_code == 0);
  auto lines = split_lines(slurp(dir / "trace.csv"));
  REQUIRE(lines.size() == 22);
  CHECK(lines[0] == "k,t,x_1,x_2,u_1,e_norm_sq,threshold,triggered,p,V");
  const std::size_t n = 2, m = 1;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    CHECK(count_fields(lines[i]) == 1 + n + m + 4 + 1 + 1);
    if (i > 0) CHECK(lines[i].rfind(std::to_string(i - 1) + ",", 0) == 0);
  }
  const json sim = json::parse(slurp(dir / "simulate.json"));
  CHECK(sim["summary"]["transmissions"].get<int>() < 20);

  c.simulation.policy = PolicyKind::kPeriodic;
  run_simulate(c, dir);
  lines = split_lines(slurp(dir / "trace.csv"));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = count_fields(lines[i]);
    std::istringstream is(lines[i]);
    std::string cell;
    for (std::size_t f = 0; f < fields - 2; ++f) std::getline(is, cell, ',');
    CHECK(cell == "1");
  }

  c.simulation.x0 = {0.0, 0.0};
  run_simulate(c, dir);
  lines = split_lines(slurp(dir / "trace.csv"));
  for (std::size_t i = 1; i < lines.size(); ++i) CHECK(lines[i].find(",0,0,") != std::string::npos);
}

TEST_CASE("compare report", "[cli]") {
  const fs::path dir = scratch("compare");
  ExperimentConfig c = load_config(kConfigs / "section4.json");
  run_compare(c, dir);
  json doc = json::parse(slurp(dir / "compare.json"));
  const double events = doc["event"]["transmissions"].get<double>();
  CHECK(doc["periodic"]["transmissions"] == 21);
  CHECK(doc["savings_ratio"].get<double>() == json_number(1.0 - events / 21.0).get<double>());
  CHECK(doc["savings_ratio"].get<double>() > 0.0);

  c.simulation.mu = 1e-12;
  run_compare(c, dir);
  doc = json::parse(slurp(dir / "compare.json"));
  CHECK(doc["savings_ratio"].get<double>() == 0.0);
}

TEST_CASE("outputs are byte-identical across runs", "[cli]") {
  for (const char* name : {"section4.json", "feasible_demo.json"}) {
    const ExperimentConfig c = load_config(kConfigs / name);
    const fs::path a = scratch(std::string("det_a_") + name);
    const fs::path b = scratch(std::string("det_b_") + name);
    for (const fs::path& dir : {a, b}) {
      run_synth(c, dir);
      run_simulate(c, dir);
      run_compare(c, dir);
    }
    for (const char* file : {"synth.json", "trace.csv", "simulate.json", "compare.json",
                             "trace_periodic.csv", "trace_event.csv"}) {
      CHECK(slurp(a / file) == slurp(b / file));
    }
  }
}

TEST_CASE("seed override changes random trajectories only through the seed", "[cli]") {
  const fs::path dir = scratch("seed");
  const std::string demo = (kConfigs / "feasible_demo.json").string();
  REQUIRE(run_cli("simulate --config " + demo + " --seed 5 --out " + (dir / "a").string(), dir / "log") == 0);
  REQUIRE(run_cli("simulate --config " + demo + " --seed 5 --out " + (dir / "b").string(), dir / "log") == 0);
  REQUIRE(run_cli("simulate --config " + demo + " --seed 6 --out " + (dir / "c").string(), dir / "log") == 0);
  CHECK(slurp(dir / "a" / "trace.csv") == slurp(dir / "b" / "trace.csv"));
  CHECK(slurp(dir / "a" / "trace.csv") != slurp(dir / "c" / "trace.csv"));
}

TEST_CASE("verify reports the boundary violation on the example config", "[cli]") {
  const fs::path dir = scratch("verify");
  const CommandResult r = run_verify(load_config(kConfigs / "section4.json"), dir);
  CHECK(r.exit_code == kExitVerificationFailure);
  const json doc = json::parse(slurp(dir / "verify.json"));
  bool saw9 = false;
  for (const auto& c : doc["feasibility"]) {
    if (c["id"] == "9") {
      saw9 = true;
      CHECK(c["verdict"] == "fails");
      CHECK(c["witness"] == json::parse("[0.8]"));
    }
  }
  CHECK(saw9);
}

TEST_CASE("verify on the restricted and scalar configs reports what fails", "[cli]") {
  const fs::path dir = scratch("verify2");
  const CommandResult p07 = run_verify(load_config(kConfigs / "section4_p07.json"), dir);
  CHECK(p07.exit_code == kExitVerificationFailure);
  const json doc = json::parse(slurp(dir / "verify.json"));
  for (const auto& c : doc["feasibility"]) {
    if (c["id"] == "9" || c["id"] == "23") CHECK(c["verdict"] == "holds");
    if (c["id"] == "13") CHECK(c["verdict"] == "fails");
  }
  CHECK(doc["synthesis_failure"]["condition"] == "14");

  const CommandResult sg = run_verify(load_config(kConfigs / "scalar_golden.json"), dir);
  CHECK(sg.exit_code == kExitVerificationFailure);
  const json sdoc = json::parse(slurp(dir / "verify.json"));
  CHECK(sdoc["synthesis_failure"]["condition"] == "24");
  for (const auto& c : sdoc["checks"]) {
    if (c["name"] == "inversion_identity" || c["name"] == "lemma1") CHECK(c["holds"] == true);
    if (c["name"] == "lemma2") CHECK(c["holds"] == false);
  }
}
