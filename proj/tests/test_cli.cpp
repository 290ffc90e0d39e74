// Copyright 2026 The ftpl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "ftpl/experiments.hpp"

using namespace ftpl;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ftpl_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    rows.push_back(std::move(cells));
  }
  return rows;
}

json base_sweep_config() {
  return json::parse(R"({
    "experiment": "regret-sweep",
    "experiment_id": "mini",
    "seed": 5,
    "replications": 6,
    "out_dir": "unused",
    "box": {"lo": [-5.0], "hi": [5.0]},
    "adversary": {"kind": "hinge"},
    "learner": {"variant": "ftpl", "eta": "default"},
    "oracle": {"kind": "pwl1d"},
    "T_list": [64, 128, 192, 256]
  })");
}

int run_cli(const std::string& args, const fs::path& capture) {
  const std::string cmd =
      std::string(FTPL_CLI_PATH) + " " + args + " >" + capture.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("missing eta for ftpl names the field") {
  json j = base_sweep_config();
  j["learner"].erase("eta");
  try {
    parse_experiment_config(j);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field == "learner.eta");
  }
}

TEST_CASE("config validation errors carry field paths") {
  {
    json j = base_sweep_config();
    j["T_list"] = {128, 128, 256};
    CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);
  }
  {
    json j = base_sweep_config();
    j["experiment"] = "dance";
    try {
      parse_experiment_config(j);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.field == "experiment");
    }
  }
  {
    json j = base_sweep_config();
    j["learner"]["variant"] = "oftpl";  // guess missing
    try {
      parse_experiment_config(j);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.field == "learner.guess");
    }
  }
  {
    json j = base_sweep_config();
    j["box"]["lo"] = {-5.0, -5.0};
    j["box"]["hi"] = {5.0, 5.0};
    // pwl1d oracle cannot serve a 2-d box.
    CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);
  }
  {
    json j = base_sweep_config();
    j["replications"] = 0;
    CHECK_THROWS_AS(parse_experiment_config(j), ConfigError);
  }
}

TEST_CASE("an infeasible grid warns with a suggested spacing") {
  json j = base_sweep_config();
  j["box"]["lo"] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  j["box"]["hi"] = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  j["oracle"] = {{"kind", "grid"}, {"h", 0.01}};
  const ExperimentConfig cfg = parse_experiment_config(j);
  const auto warnings = validate_experiment(cfg);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].field == "oracle");
  CHECK(warnings[0].message.find("suggested h") != std::string::npos);
}

TEST_CASE("all shipped presets parse and validate cleanly") {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(FTPL_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    INFO(entry.path().string());
    const ExperimentConfig cfg = load_experiment_config(entry.path());
    CHECK(validate_experiment(cfg).empty());
  }
  CHECK(seen >= 7);
}

TEST_CASE("the killer preset reproduces the deterministic numbers") {
  const ExperimentConfig cfg =
      load_experiment_config(fs::path(FTPL_CONFIG_DIR) / "killer.json");
  RunOverrides overrides;
  overrides.out_dir = fresh_dir("killer").string();
  overrides.workers = 2;
  const RunResult result = run_experiment(cfg, overrides);
  CHECK(result.checks_passed);

  const auto summary = read_csv(fs::path(*overrides.out_dir) / "summary.csv");
  REQUIRE(summary.size() == 2);
  const auto& header = summary[0];
  const auto& row = summary[1];
  REQUIRE(header.size() == row.size());
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return row[i];
    }
    FAIL("missing column ", name);
    return std::string();
  };
  CHECK(std::stod(col("learner_cum_loss")) == doctest::Approx(5000.0).epsilon(1e-12));
  CHECK(std::stod(col("mean_regret")) >= 2.5 - 1e-9);
  CHECK(col("T") == "1000");
}

TEST_CASE("per-round csv columns follow the fixed schema") {
  json j = base_sweep_config();
  j["T_list"] = {16, 32};
  j["replications"] = 2;
  const ExperimentConfig cfg = parse_experiment_config(j);
  RunOverrides overrides;
  overrides.out_dir = fresh_dir("schema").string();
  run_experiment(cfg, overrides);

  const auto rounds = read_csv(fs::path(*overrides.out_dir) / "rounds.csv");
  REQUIRE(!rounds.empty());
  const std::vector<std::string> expect = {"experiment_id", "replication", "t",
                                           "regret_so_far", "stability_increment",
                                           "sigma_l1"};
  CHECK(rounds[0] == expect);
  CHECK(rounds.size() == 1 + 2 * (16 + 32));

  const auto summary = read_csv(fs::path(*overrides.out_dir) / "summary.csv");
  const std::vector<std::string> prefix = {"experiment_id", "T",         "mean_regret",
                                           "ci",            "stability_mean", "bound",
                                           "slope",         "intercept", "r2"};
  REQUIRE(summary[0].size() >= prefix.size());
  for (std::size_t i = 0; i < prefix.size(); ++i) CHECK(summary[0][i] == prefix[i]);
}

TEST_CASE("reruns are byte-identical and independent of the worker count") {
  const ExperimentConfig cfg = parse_experiment_config(base_sweep_config());

  RunOverrides one;
  one.out_dir = fresh_dir("workers1").string();
  one.workers = 1;
  run_experiment(cfg, one);

  RunOverrides four;
  four.out_dir = fresh_dir("workers4").string();
  four.workers = 4;
  run_experiment(cfg, four);

  for (const char* name : {"rounds.csv", "summary.csv"}) {
    CHECK(slurp(fs::path(*one.out_dir) / name) == slurp(fs::path(*four.out_dir) / name));
  }
}

TEST_CASE("saddle experiments write the documented files") {
  const ExperimentConfig cfg =
      load_experiment_config(fs::path(FTPL_CONFIG_DIR) / "saddle_bilinear.json");
  ExperimentConfig small = cfg;  // shrunk for test speed; schema is the point
  small.saddle->T = 64;
  small.saddle->runs = 2;
  RunOverrides overrides;
  overrides.out_dir = fresh_dir("saddle").string();
  const RunResult result = run_experiment(small, overrides);
  CHECK(result.checks_passed);

  const auto summary = read_csv(fs::path(*overrides.out_dir) / "saddle_summary.csv");
  const std::vector<std::string> expect = {"T", "gap", "gap_alpha_band", "regret_x",
                                           "regret_y"};
  REQUIRE(summary.size() == 3);  // header + one row per run
  CHECK(summary[0] == expect);

  const auto rounds = read_csv(fs::path(*overrides.out_dir) / "saddle_rounds_run0.csv");
  const std::vector<std::string> round_cols = {"t", "x", "y", "payoff"};
  CHECK(rounds[0] == round_cols);
  CHECK(rounds.size() == 1 + 64);

  CHECK(fs::exists(fs::path(*overrides.out_dir) / "manifest.json"));
}

TEST_CASE("probe-suite and oracle-audit presets pass their checks") {
  {
    ExperimentConfig cfg =
        load_experiment_config(fs::path(FTPL_CONFIG_DIR) / "probe_suite.json");
    cfg.probes = 50;  // smoke-scale; the acceptance suite runs the full count
    cfg.btl_traces = 3;
    RunOverrides overrides;
    overrides.out_dir = fresh_dir("probes").string();
    CHECK(run_experiment(cfg, overrides).checks_passed);
  }
  {
    ExperimentConfig cfg =
        load_experiment_config(fs::path(FTPL_CONFIG_DIR) / "oracle_audit.json");
    cfg.queries = 50;
    RunOverrides overrides;
    overrides.out_dir = fresh_dir("audit").string();
    CHECK(run_experiment(cfg, overrides).checks_passed);
  }
}

TEST_CASE("manifest records version, seed and resolved config") {
  const ExperimentConfig cfg =
      load_experiment_config(fs::path(FTPL_CONFIG_DIR) / "killer.json");
  RunOverrides overrides;
  overrides.out_dir = fresh_dir("manifest").string();
  overrides.seed = 99;
  run_experiment(cfg, overrides);
  const json manifest =
      json::parse(slurp(fs::path(*overrides.out_dir) / "manifest.json"));
  CHECK(manifest.at("library_version") == kLibraryVersion);
  CHECK(manifest.at("seed") == 99);
  CHECK(manifest.at("config").at("seed") == 99);
  CHECK(manifest.at("kind") == "killer");
}

// ---------------------------------------------------------------------------
// Binary-level checks
// ---------------------------------------------------------------------------

TEST_CASE("cli validate/run exit codes") {
  const fs::path dir = fresh_dir("cli");
  const fs::path cap = dir / "out.txt";
  const fs::path killer = fs::path(FTPL_CONFIG_DIR) / "killer.json";

  CHECK(run_cli("validate " + killer.string(), cap) == 0);
  CHECK(run_cli("run " + killer.string() + " --out " + (dir / "k1").string(), cap) == 0);

  const fs::path bad = dir / "bad.json";
  {
    json j = base_sweep_config();
    j["learner"].erase("eta");
    std::ofstream(bad) << j.dump(2);
  }
  CHECK(run_cli("validate " + bad.string(), cap) == 2);
  CHECK(slurp(cap).find("learner.eta") != std::string::npos);
  CHECK(run_cli("run " + bad.string(), cap) == 2);

  CHECK(run_cli("validate " + (dir / "missing.json").string(), cap) == 2);

  // Runtime failure: a grid far beyond its budget aborts replication 0.
  const fs::path doomed = dir / "doomed.json";
  {
    json j = base_sweep_config();
    j["T_list"] = {4};
    j["replications"] = 1;
    j["oracle"] = {{"kind", "grid"}, {"h", 1e-9}};
    std::ofstream(doomed) << j.dump(2);
  }
  CHECK(run_cli("run " + doomed.string() + " --out " + (dir / "k2").string(), cap) == 1);
  CHECK(slurp(cap).find("replication") != std::string::npos);
}

TEST_CASE("cli reruns with equal seeds are byte-identical") {
  const fs::path dir = fresh_dir("cli_repro");
  const fs::path cap = dir / "out.txt";
  const fs::path killer = fs::path(FTPL_CONFIG_DIR) / "killer.json";
  REQUIRE(run_cli("run " + killer.string() + " --seed 3 --workers 1 --out " +
                      (dir / "a").string(),
                  cap) == 0);
  REQUIRE(run_cli("run " + killer.string() + " --seed 3 --workers 4 --out " +
                      (dir / "b").string(),
                  cap) == 0);
  for (const char* name : {"rounds.csv", "summary.csv"}) {
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
  }
}
