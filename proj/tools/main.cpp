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

#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ftpl/experiments.hpp"

namespace {

void print_error(const std::string& category, const std::string& field,
                 const std::string& message) {
  nlohmann::json err;
  err["category"] = category;
  if (!field.empty()) err["field"] = field;
  err["message"] = message;
  std::cerr << err.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Follow-the-perturbed-leader experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "experiment config file (JSON)")->required();
  };

  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  add_common(run);
  run->add_option("--workers", workers, "max parallel replications");
  run->add_option("--out", out_dir, "output directory (overrides config)");
  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt =
      run->add_option("--seed", seed_value, "master seed (overrides config)");

  CLI::App* validate = app.add_subcommand("validate", "check a config without running");
  add_common(validate);

  CLI11_PARSE(app, argc, argv);

  try {
    const ftpl::ExperimentConfig config = ftpl::load_experiment_config(config_path);
    const auto warnings = ftpl::validate_experiment(config);

    if (validate->parsed()) {
      for (const auto& w : warnings) {
        std::cout << "warning: " << w.field << ": " << w.message << '\n';
      }
      std::cout << "ok: " << ftpl::experiment_kind_name(config.kind) << " '"
                << config.experiment_id << "' is valid\n";
      return 0;
    }

    for (const auto& w : warnings) {
      std::cerr << "warning: " << w.field << ": " << w.message << '\n';
    }
    ftpl::RunOverrides overrides;
    overrides.workers = workers < 1 ? 1 : workers;
    if (!out_dir.empty()) overrides.out_dir = out_dir;
    if (seed_opt->count() > 0) overrides.seed = seed_value;

    const ftpl::RunResult result = ftpl::run_experiment(config, overrides);
    for (const auto& f : result.files) {
      std::cout << "wrote " << f.string() << '\n';
    }
    if (!result.checks_passed) {
      print_error("verification-failure", "", result.note);
      return 1;
    }
    return 0;
  } catch (const ftpl::ConfigError& e) {
    print_error("config", e.field, e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error("runtime", "", e.what());
    return 1;
  }
}
