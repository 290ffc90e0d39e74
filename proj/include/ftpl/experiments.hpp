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

#ifndef FTPL_EXPERIMENTS_HPP_
#define FTPL_EXPERIMENTS_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftpl/adversary.hpp"
#include "ftpl/box.hpp"
#include "ftpl/harness.hpp"
#include "ftpl/learner.hpp"
#include "ftpl/saddle.hpp"

namespace ftpl {

inline constexpr const char* kLibraryVersion = "0.1.0";

// Configuration problem, reported with the offending field's path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, std::string message)
      : std::runtime_error(field + ": " + message), field(std::move(field)) {}
  std::string field;
};

enum class ExperimentKind {
  regret_sweep,
  probe_suite,
  stability,
  killer,
  saddle,
  oracle_audit,
};

std::string experiment_kind_name(ExperimentKind kind);

// Placeholder domain; parsing always overwrites it.
inline Box unit_interval_box() {
  return Box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
}

struct SaddleSpec {
  enum class Payoff { bilinear, hinge };
  Payoff payoff = Payoff::bilinear;
  Box box_x = unit_interval_box();
  Box box_y = unit_interval_box();
  LearnerConfig learner_x;
  LearnerConfig learner_y;
  bool eta_default_x = false;
  bool eta_default_y = false;
  int T = 1;
  int runs = 1;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::regret_sweep;
  std::string experiment_id;
  std::uint64_t seed = 1;
  int replications = 1;
  std::string out_dir;

  std::optional<Box> box;
  AdversaryConfig adversary;
  LearnerConfig learner;
  bool eta_default = false;  // learner.eta tracks T via default_eta
  std::optional<OracleConfig> reference_oracle;
  std::vector<int> t_list;  // one entry unless regret-sweep

  std::vector<double> eta_list;  // stability
  int probes = 1000;             // probe-suite
  double probe_grid_h = 0.01;    // probe-suite's relaxed suite
  int btl_traces = 20;           // probe-suite
  int btl_T = 50;                // probe-suite
  int queries = 1000;            // oracle-audit
  std::vector<double> grid_h_list{0.1, 0.01};

  std::optional<SaddleSpec> saddle;

  nlohmann::json resolved;  // config with defaults filled, for the manifest
};

// Parse + cross-field validation; throws ConfigError with the field path.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct ValidationIssue {
  std::string field;
  std::string message;
};

// Semantic warnings on an already-parsed config (e.g. grid budget
// infeasible for the requested h and dimension, with a suggested h).
std::vector<ValidationIssue> validate_experiment(const ExperimentConfig& config);

struct RunOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  int workers = 1;
};

struct RunResult {
  std::vector<std::filesystem::path> files;
  bool checks_passed = true;
  std::string note;
};

// Executes the experiment and writes its CSV outputs plus manifest.json.
// Throws std::runtime_error on runtime failures (message carries the round
// or replication index).
RunResult run_experiment(const ExperimentConfig& config, const RunOverrides& overrides);

}  // namespace ftpl

#endif  // FTPL_EXPERIMENTS_HPP_
