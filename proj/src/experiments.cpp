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

#include "ftpl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ftpl/csv.hpp"

namespace ftpl {

using nlohmann::json;

namespace {

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

const json& require_field(const json& j, const std::string& base, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(join_path(base, key), "missing required field");
  }
  return j.at(key);
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

Vector as_vector(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a nonempty array");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] =
        as_number(v[i], path + "[" + std::to_string(i) + "]");
  }
  return out;
}

Box parse_box(const json& j, const std::string& path) {
  const Vector lo = as_vector(require_field(j, path, "lo"), join_path(path, "lo"));
  const Vector hi = as_vector(require_field(j, path, "hi"), join_path(path, "hi"));
  try {
    return Box(lo, hi);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

OracleConfig parse_oracle(const json& j, const std::string& path) {
  OracleConfig oc;
  const std::string kind = as_string(require_field(j, path, "kind"), join_path(path, "kind"));
  if (kind == "pwl1d") {
    oc.kind = OracleConfig::Kind::pwl1d;
  } else if (kind == "grid") {
    oc.kind = OracleConfig::Kind::grid;
    if (j.contains("h")) oc.h = as_number(j.at("h"), join_path(path, "h"));
    if (!(oc.h > 0)) throw ConfigError(join_path(path, "h"), "must be positive");
    if (j.contains("budget")) {
      oc.budget = as_int(j.at("budget"), join_path(path, "budget"));
      if (oc.budget < 1) throw ConfigError(join_path(path, "budget"), "must be >= 1");
    }
  } else if (kind == "local-search") {
    oc.kind = OracleConfig::Kind::local_search;
    if (j.contains("restarts")) {
      oc.restarts = as_int(j.at("restarts"), join_path(path, "restarts"));
    }
    if (j.contains("steps")) oc.steps = as_int(j.at("steps"), join_path(path, "steps"));
    if (oc.restarts < 1) throw ConfigError(join_path(path, "restarts"), "must be >= 1");
    if (oc.steps < 1) throw ConfigError(join_path(path, "steps"), "must be >= 1");
  } else {
    throw ConfigError(join_path(path, "kind"),
                      "unknown oracle kind '" + kind + "' (pwl1d | grid | local-search)");
  }
  return oc;
}

// Returns the learner config plus whether eta is the per-T "default" rule.
std::pair<LearnerConfig, bool> parse_learner(const json& j, const std::string& path,
                                             const OracleConfig& oracle) {
  LearnerConfig lc;
  lc.oracle = oracle;
  bool eta_default = false;
  const std::string variant =
      as_string(require_field(j, path, "variant"), join_path(path, "variant"));
  if (variant == "ftpl") {
    lc.variant = Variant::ftpl;
  } else if (variant == "oftpl") {
    lc.variant = Variant::oftpl;
  } else if (variant == "ftl") {
    lc.variant = Variant::ftl;
  } else {
    throw ConfigError(join_path(path, "variant"),
                      "unknown variant '" + variant + "' (ftpl | oftpl | ftl)");
  }

  if (lc.variant == Variant::ftl) {
    lc.eta = std::numeric_limits<double>::infinity();
  } else {
    const json& eta = require_field(j, path, "eta");
    const std::string eta_path = join_path(path, "eta");
    if (eta.is_string()) {
      const auto s = eta.get<std::string>();
      if (s == "default") {
        eta_default = true;
        lc.eta = 1.0;  // placeholder; resolved per T
      } else if (s == "inf") {
        lc.eta = std::numeric_limits<double>::infinity();
      } else {
        throw ConfigError(eta_path, "expected a positive number, \"default\" or \"inf\"");
      }
    } else {
      lc.eta = as_number(eta, eta_path);
      if (!(lc.eta > 0)) throw ConfigError(eta_path, "must be positive");
    }
  }

  if (j.contains("perturbation")) {
    const std::string p =
        as_string(j.at("perturbation"), join_path(path, "perturbation"));
    if (p == "fresh") {
      lc.perturbation = PerturbationMode::fresh;
    } else if (p == "frozen") {
      lc.perturbation = PerturbationMode::frozen;
    } else {
      throw ConfigError(join_path(path, "perturbation"), "expected fresh | frozen");
    }
  }

  if (lc.variant == Variant::oftpl) {
    const std::string g =
        as_string(require_field(j, path, "guess"), join_path(path, "guess"));
    if (g == "zero") {
      lc.guess = GuessStrategy::zero;
    } else if (g == "last-loss") {
      lc.guess = GuessStrategy::last_loss;
    } else if (g == "running-average") {
      lc.guess = GuessStrategy::running_average;
    } else {
      throw ConfigError(join_path(path, "guess"),
                        "expected zero | last-loss | running-average");
    }
  }
  return {lc, eta_default};
}

AdversaryConfig parse_adversary(const json& j, const std::string& path) {
  AdversaryConfig ac;
  const std::string kind = as_string(require_field(j, path, "kind"), join_path(path, "kind"));
  if (kind == "hinge") {
    ac.kind = AdversaryConfig::Kind::hinge;
  } else if (kind == "sinusoid") {
    ac.kind = AdversaryConfig::Kind::sinusoid;
    if (j.contains("lipschitz")) {
      ac.lipschitz = as_number(j.at("lipschitz"), join_path(path, "lipschitz"));
    }
    if (j.contains("freq")) ac.freq = as_number(j.at("freq"), join_path(path, "freq"));
    if (!(ac.lipschitz > 0)) throw ConfigError(join_path(path, "lipschitz"), "must be positive");
    if (!(ac.freq > 0)) throw ConfigError(join_path(path, "freq"), "must be positive");
  } else if (kind == "slowly-varying") {
    ac.kind = AdversaryConfig::Kind::slowly_varying;
    if (j.contains("block")) ac.block = as_int(j.at("block"), join_path(path, "block"));
    if (ac.block < 1) throw ConfigError(join_path(path, "block"), "must be >= 1");
  } else if (kind == "killer") {
    ac.kind = AdversaryConfig::Kind::killer;
    if (j.contains("diameter")) {
      ac.diameter = as_number(j.at("diameter"), join_path(path, "diameter"));
      if (!(ac.diameter > 0)) throw ConfigError(join_path(path, "diameter"), "must be positive");
    }
  } else if (kind == "chaser") {
    ac.kind = AdversaryConfig::Kind::chaser;
  } else {
    throw ConfigError(join_path(path, "kind"),
                      "unknown adversary '" + kind +
                          "' (hinge | sinusoid | slowly-varying | killer | chaser)");
  }
  return ac;
}

double adversary_lipschitz(const AdversaryConfig& a) {
  return a.kind == AdversaryConfig::Kind::sinusoid ? a.lipschitz : 1.0;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return RngStream(master).fork(a).fork(b).word(0);
}

bool deterministic_learner(const LearnerConfig& c) {
  return c.variant == Variant::ftl || std::isinf(c.eta);
}

}  // namespace

std::string experiment_kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::regret_sweep:
      return "regret-sweep";
    case ExperimentKind::probe_suite:
      return "probe-suite";
    case ExperimentKind::stability:
      return "stability";
    case ExperimentKind::killer:
      return "killer";
    case ExperimentKind::saddle:
      return "saddle";
    case ExperimentKind::oracle_audit:
      return "oracle-audit";
  }
  return "?";
}

ExperimentConfig parse_experiment_config(const json& j) {
  ExperimentConfig cfg;
  const std::string kind = as_string(require_field(j, "", "experiment"), "experiment");
  if (kind == "regret-sweep") {
    cfg.kind = ExperimentKind::regret_sweep;
  } else if (kind == "probe-suite") {
    cfg.kind = ExperimentKind::probe_suite;
  } else if (kind == "stability") {
    cfg.kind = ExperimentKind::stability;
  } else if (kind == "killer") {
    cfg.kind = ExperimentKind::killer;
  } else if (kind == "saddle") {
    cfg.kind = ExperimentKind::saddle;
  } else if (kind == "oracle-audit") {
    cfg.kind = ExperimentKind::oracle_audit;
  } else {
    throw ConfigError("experiment", "unknown experiment kind '" + kind + "'");
  }

  cfg.experiment_id =
      j.contains("experiment_id") ? as_string(j.at("experiment_id"), "experiment_id") : kind;
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer()) {
      throw ConfigError("seed", "expected a nonnegative integer");
    }
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("replications")) {
    cfg.replications = as_int(j.at("replications"), "replications");
    if (cfg.replications < 1) throw ConfigError("replications", "must be >= 1");
  }
  cfg.out_dir = j.contains("out_dir") ? as_string(j.at("out_dir"), "out_dir")
                                      : "out/" + cfg.experiment_id;

  const bool game_kind = cfg.kind != ExperimentKind::saddle;
  OracleConfig oracle;  // pwl1d default
  if (j.contains("oracle")) oracle = parse_oracle(j.at("oracle"), "oracle");

  if (game_kind) {
    cfg.box = parse_box(require_field(j, "", "box"), "box");
    if (j.contains("adversary")) {
      cfg.adversary = parse_adversary(j.at("adversary"), "adversary");
    } else if (cfg.kind == ExperimentKind::killer) {
      cfg.adversary.kind = AdversaryConfig::Kind::killer;
      // The usual layout for this construction is a [-D, D] domain, so the
      // hinge parameter defaults to half the sup-norm diameter.
      cfg.adversary.diameter = cfg.box->linf_diameter() / 2.0;
    }
    if (cfg.kind == ExperimentKind::killer &&
        cfg.adversary.kind == AdversaryConfig::Kind::killer && cfg.adversary.diameter == 0) {
      cfg.adversary.diameter = cfg.box->linf_diameter() / 2.0;
    }

    if (cfg.kind == ExperimentKind::regret_sweep || cfg.kind == ExperimentKind::killer ||
        cfg.kind == ExperimentKind::stability) {
      auto [lc, eta_def] = parse_learner(require_field(j, "", "learner"), "learner", oracle);
      cfg.learner = lc;
      cfg.eta_default = eta_def;
    } else {
      cfg.learner.oracle = oracle;
    }

    if (j.contains("T_list")) {
      const json& tl = j.at("T_list");
      if (!tl.is_array() || tl.empty()) throw ConfigError("T_list", "expected a nonempty array");
      for (std::size_t i = 0; i < tl.size(); ++i) {
        cfg.t_list.push_back(as_int(tl[i], "T_list[" + std::to_string(i) + "]"));
      }
      for (std::size_t i = 0; i + 1 < cfg.t_list.size(); ++i) {
        if (cfg.t_list[i] >= cfg.t_list[i + 1]) {
          throw ConfigError("T_list", "must be strictly increasing");
        }
      }
      if (cfg.t_list.front() < 1) throw ConfigError("T_list", "entries must be >= 1");
    } else if (j.contains("T")) {
      const int T = as_int(j.at("T"), "T");
      if (T < 1) throw ConfigError("T", "must be >= 1");
      cfg.t_list.push_back(T);
    } else if (cfg.kind != ExperimentKind::probe_suite &&
               cfg.kind != ExperimentKind::oracle_audit) {
      throw ConfigError("T", "missing required field (or T_list)");
    }
  }

  if (j.contains("reference_oracle")) {
    cfg.reference_oracle = parse_oracle(j.at("reference_oracle"), "reference_oracle");
  }

  switch (cfg.kind) {
    case ExperimentKind::stability: {
      const json& el = require_field(j, "", "eta_list");
      if (!el.is_array() || el.empty()) throw ConfigError("eta_list", "expected a nonempty array");
      for (std::size_t i = 0; i < el.size(); ++i) {
        const double e = as_number(el[i], "eta_list[" + std::to_string(i) + "]");
        if (!(e > 0)) throw ConfigError("eta_list[" + std::to_string(i) + "]", "must be positive");
        cfg.eta_list.push_back(e);
      }
      if (cfg.replications < 30) {
        throw ConfigError("replications", "stability needs >= 30 replications");
      }
      if (cfg.learner.perturbation != PerturbationMode::frozen) {
        throw ConfigError("learner.perturbation", "stability requires frozen mode");
      }
      if (cfg.learner.oracle.kind == OracleConfig::Kind::local_search) {
        throw ConfigError("oracle.kind", "stability needs a certified oracle");
      }
      break;
    }
    case ExperimentKind::killer: {
      if (!deterministic_learner(cfg.learner)) {
        throw ConfigError("learner.variant",
                          "the killer adversary requires a deterministic learner "
                          "(ftl, or ftpl with eta = \"inf\")");
      }
      break;
    }
    case ExperimentKind::probe_suite: {
      if (cfg.box->dim() != 1) {
        throw ConfigError("box", "probe-suite uses the exact 1-d oracle; box must be 1-d");
      }
      if (j.contains("probes")) {
        cfg.probes = as_int(j.at("probes"), "probes");
        if (cfg.probes < 1) throw ConfigError("probes", "must be >= 1");
      }
      if (j.contains("grid_h")) {
        cfg.probe_grid_h = as_number(j.at("grid_h"), "grid_h");
        if (!(cfg.probe_grid_h > 0)) throw ConfigError("grid_h", "must be positive");
      }
      if (j.contains("btl_traces")) cfg.btl_traces = as_int(j.at("btl_traces"), "btl_traces");
      if (j.contains("btl_T")) cfg.btl_T = as_int(j.at("btl_T"), "btl_T");
      if (cfg.btl_traces < 0) throw ConfigError("btl_traces", "must be >= 0");
      if (cfg.btl_T < 1) throw ConfigError("btl_T", "must be >= 1");
      break;
    }
    case ExperimentKind::oracle_audit: {
      if (cfg.box->dim() != 1) {
        throw ConfigError("box", "oracle-audit compares against the exact 1-d oracle");
      }
      if (j.contains("queries")) {
        cfg.queries = as_int(j.at("queries"), "queries");
        if (cfg.queries < 1) throw ConfigError("queries", "must be >= 1");
      }
      if (j.contains("grid_h_list")) {
        cfg.grid_h_list.clear();
        const json& hl = j.at("grid_h_list");
        if (!hl.is_array() || hl.empty()) {
          throw ConfigError("grid_h_list", "expected a nonempty array");
        }
        for (std::size_t i = 0; i < hl.size(); ++i) {
          const double h = as_number(hl[i], "grid_h_list[" + std::to_string(i) + "]");
          if (!(h > 0)) throw ConfigError("grid_h_list[" + std::to_string(i) + "]", "must be positive");
          cfg.grid_h_list.push_back(h);
        }
      }
      break;
    }
    case ExperimentKind::saddle: {
      SaddleSpec spec;
      const json& payoff = require_field(j, "", "payoff");
      const std::string pk = as_string(require_field(payoff, "payoff", "kind"), "payoff.kind");
      if (pk == "bilinear") {
        spec.payoff = SaddleSpec::Payoff::bilinear;
      } else if (pk == "hinge") {
        spec.payoff = SaddleSpec::Payoff::hinge;
      } else {
        throw ConfigError("payoff.kind", "expected bilinear | hinge");
      }
      spec.box_x = parse_box(require_field(j, "", "box_x"), "box_x");
      spec.box_y = parse_box(require_field(j, "", "box_y"), "box_y");
      OracleConfig ox = oracle;
      OracleConfig oy = oracle;
      const json& jx = require_field(j, "", "learner_x");
      const json& jy = require_field(j, "", "learner_y");
      if (jx.contains("oracle")) ox = parse_oracle(jx.at("oracle"), "learner_x.oracle");
      if (jy.contains("oracle")) oy = parse_oracle(jy.at("oracle"), "learner_y.oracle");
      auto [lx, dx] = parse_learner(jx, "learner_x", ox);
      auto [ly, dy] = parse_learner(jy, "learner_y", oy);
      spec.learner_x = lx;
      spec.learner_y = ly;
      spec.eta_default_x = dx;
      spec.eta_default_y = dy;
      spec.T = as_int(require_field(j, "", "T"), "T");
      if (spec.T < 1) throw ConfigError("T", "must be >= 1");
      if (j.contains("runs")) {
        spec.runs = as_int(j.at("runs"), "runs");
        if (spec.runs < 1) throw ConfigError("runs", "must be >= 1");
      }
      cfg.saddle = std::move(spec);
      break;
    }
    default:
      break;
  }

  if (game_kind && cfg.box && cfg.learner.oracle.kind == OracleConfig::Kind::pwl1d &&
      cfg.box->dim() != 1) {
    throw ConfigError("oracle.kind", "pwl1d requires a 1-dimensional box");
  }

  cfg.resolved = j;
  cfg.resolved["experiment_id"] = cfg.experiment_id;
  cfg.resolved["seed"] = cfg.seed;
  cfg.resolved["replications"] = cfg.replications;
  cfg.resolved["out_dir"] = cfg.out_dir;
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("(file)", "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("(file)", std::string("JSON parse error: ") + e.what());
  }
  return parse_experiment_config(j);
}

std::vector<ValidationIssue> validate_experiment(const ExperimentConfig& config) {
  std::vector<ValidationIssue> warnings;
  auto check_grid = [&](const OracleConfig& oc, const Box& box, const std::string& field) {
    if (oc.kind != OracleConfig::Kind::grid) return;
    try {
      grid_num_points(box, oc.h, oc.budget);
    } catch (const GridBudgetError& e) {
      std::ostringstream os;
      os << "grid budget exceeded for this box and h=" << oc.h << "; suggested h >= "
         << e.suggested_h;
      warnings.push_back({field, os.str()});
    }
  };
  if (config.box) {
    check_grid(config.learner.oracle, *config.box, "oracle");
    if (config.reference_oracle) {
      check_grid(*config.reference_oracle, *config.box, "reference_oracle");
    }
  }
  if (config.saddle) {
    check_grid(config.saddle->learner_x.oracle, config.saddle->box_x, "learner_x.oracle");
    check_grid(config.saddle->learner_y.oracle, config.saddle->box_y, "learner_y.oracle");
  }
  return warnings;
}

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string> kRoundHeader = {"experiment_id", "replication", "t",
                                               "regret_so_far", "stability_increment",
                                               "sigma_l1"};
const std::vector<std::string> kSummaryHeader = {
    "experiment_id", "T",         "mean_regret",      "ci",
    "stability_mean", "bound",    "slope",            "intercept",
    "r2",             "learner_cum_loss", "best_value", "eta",
    "replications"};

struct RepRows {
  std::vector<std::vector<std::string>> rows;
};

OracleConfig resolve_reference(const ExperimentConfig& cfg) {
  if (cfg.reference_oracle) return *cfg.reference_oracle;
  const bool pwl_family = cfg.adversary.kind != AdversaryConfig::Kind::sinusoid;
  if (cfg.box && cfg.box->dim() == 1 && pwl_family) {
    return OracleConfig{};  // pwl1d
  }
  OracleConfig oc;
  oc.kind = OracleConfig::Kind::grid;
  oc.h = 0.01;
  return oc;
}

MetricMap game_rep_metrics(const ExperimentConfig& cfg, const LearnerConfig& lcfg,
                           int T, int rep, std::uint64_t game_seed,
                           const OracleConfig& reference, RepRows* rows_out,
                           std::optional<GameTrace>* trace_out) {
  const Adversary adversary = make_adversary(
      cfg.adversary, *cfg.box, T, RngStream(game_seed).fork(kGameAdversaryTag));
  GameTrace trace =
      play(lcfg, adversary, *cfg.box, T, game_seed, /*per_round_diagnostics=*/rows_out != nullptr);
  const RegretReport report = regret(trace, reference);

  if (rows_out != nullptr) {
    rows_out->rows.reserve(static_cast<std::size_t>(T));
    double cum = 0.0;
    for (std::size_t k = 0; k < trace.rounds.size(); ++k) {
      const auto& r = trace.rounds[k];
      cum += r.loss_value;
      const double regret_so_far = cum - r.prefix_best;
      const double stability_increment =
          k == 0 ? 0.0 : l1_distance(trace.rounds[k - 1].x, r.x);
      rows_out->rows.push_back({cfg.experiment_id, csv_num(rep), csv_num(r.t),
                                csv_num(regret_so_far), csv_num(stability_increment),
                                csv_num(r.sigma.cwiseAbs().sum())});
    }
  }
  MetricMap metrics;
  metrics["avg_regret"] = report.avg_regret;
  metrics["stability_mean"] = report.stability_mean;
  metrics["cum_loss"] = report.learner_cum_loss;
  metrics["best_value"] = report.best_value;
  if (trace_out != nullptr) *trace_out = std::move(trace);
  return metrics;
}

void write_manifest(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                    const RunOverrides& overrides, std::uint64_t seed,
                    const std::vector<std::filesystem::path>& files) {
  json manifest;
  manifest["library_version"] = kLibraryVersion;
  manifest["experiment_id"] = cfg.experiment_id;
  manifest["kind"] = experiment_kind_name(cfg.kind);
  manifest["seed"] = seed;
  json resolved = cfg.resolved;
  resolved["seed"] = seed;
  if (overrides.out_dir) resolved["out_dir"] = *overrides.out_dir;
  manifest["config"] = resolved;
  json outs = json::array();
  for (const auto& f : files) outs.push_back(f.filename().string());
  manifest["outputs"] = outs;
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
}

RunResult run_game_experiment(const ExperimentConfig& cfg, const RunOverrides& overrides,
                              std::uint64_t seed, const std::filesystem::path& dir) {
  const OracleConfig reference = resolve_reference(cfg);
  const double L = adversary_lipschitz(cfg.adversary);
  const int d = static_cast<int>(cfg.box->dim());

  CsvFile rounds(kRoundHeader);
  CsvFile summary(kSummaryHeader);
  bool checks_passed = true;
  std::string note;

  const bool is_stability = cfg.kind == ExperimentKind::stability;
  const std::vector<double> eta_axis =
      is_stability ? cfg.eta_list : std::vector<double>{0.0};

  std::vector<RatePoint> rate_points;
  struct SummaryRow {
    int T;
    double eta;
    std::map<std::string, Aggregate> agg;
    double bound = std::numeric_limits<double>::quiet_NaN();
  };
  std::vector<SummaryRow> summary_rows;
  std::vector<std::vector<RepRows>> all_rows;  // per (axis point), per rep

  for (std::size_t axis = 0; axis < (is_stability ? eta_axis.size() : cfg.t_list.size());
       ++axis) {
    const int T = is_stability ? cfg.t_list.front() : cfg.t_list[axis];
    LearnerConfig lcfg = cfg.learner;
    if (is_stability) {
      lcfg.eta = eta_axis[axis];
    } else if (cfg.eta_default && lcfg.variant != Variant::ftl) {
      lcfg.eta = default_eta(L, d, T);
    }

    const int n = cfg.replications;
    std::vector<RepRows> rep_rows(static_cast<std::size_t>(n));
    std::vector<std::optional<GameTrace>> traces;
    if (is_stability) traces.resize(static_cast<std::size_t>(n));

    const auto agg = replicate(
        [&](int rep) {
          const std::uint64_t game_seed =
              derive_seed(seed, axis + 1, static_cast<std::uint64_t>(rep));
          return game_rep_metrics(cfg, lcfg, T, rep, game_seed, reference,
                                  &rep_rows[static_cast<std::size_t>(rep)],
                                  is_stability ? &traces[static_cast<std::size_t>(rep)]
                                               : nullptr);
        },
        n, overrides.workers);

    SummaryRow row{T, lcfg.variant == Variant::ftl ? 0.0 : lcfg.eta, agg};
    if (is_stability) {
      std::vector<GameTrace> tr;
      tr.reserve(static_cast<std::size_t>(n));
      for (auto& t : traces) tr.push_back(std::move(*t));
      OracleGuarantee g = OracleGuarantee::exact();
      if (!lcfg.oracle.exact()) {
        g.alpha = 0.0;
        g.beta = 0.0;
        for (const auto& t : tr) {
          for (const auto& r : t.rounds) {
            g.alpha = std::max(g.alpha, r.alpha);
            g.beta = std::max(g.beta, r.beta);
          }
        }
      }
      const StabilityCheck check =
          stability_check(tr, lcfg.eta, L, d, cfg.box->linf_diameter(), g);
      row.bound = check.bound;
      if (!check.pass) {
        checks_passed = false;
        note = "stability bound violated at eta=" + csv_num(lcfg.eta);
      }
    } else {
      rate_points.push_back(RatePoint{T, agg.at("avg_regret").mean,
                                      agg.at("avg_regret").ci_half});
    }
    summary_rows.push_back(std::move(row));
    all_rows.push_back(std::move(rep_rows));
  }

  // Rate fit over the sweep, when well defined.
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
  if (cfg.kind == ExperimentKind::regret_sweep) {
    std::vector<int> ts = cfg.t_list;
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    const bool positive = std::all_of(rate_points.begin(), rate_points.end(),
                                      [](const RatePoint& p) { return p.mean_regret > 0; });
    if (ts.size() >= 4 && positive) {
      const RateFit fit = rate_fit(rate_points);
      slope = fit.slope;
      intercept = fit.intercept;
      r2 = fit.r2;
    }
  }

  if (cfg.kind == ExperimentKind::killer) {
    // Deterministic construction: the learner's cumulative loss is exactly
    // T*D/2 and the best fixed action in hindsight is at most T*D/4.
    const double D = cfg.adversary.diameter;
    const auto& agg = summary_rows.front().agg;
    const double T = static_cast<double>(summary_rows.front().T);
    const double cum = agg.at("cum_loss").mean;
    const double best = agg.at("best_value").mean;
    if (std::abs(cum - T * D / 2.0) > 1e-9 || best > T * D / 4.0 + 1e-9) {
      checks_passed = false;
      note = "killer invariants violated: cum=" + csv_num(cum) + " best=" + csv_num(best);
    }
  }

  for (const auto& per_axis : all_rows) {
    for (const auto& rep : per_axis) {
      for (const auto& r : rep.rows) rounds.row(r);
    }
  }
  for (const auto& row : summary_rows) {
    summary.row({cfg.experiment_id, csv_num(row.T), csv_num(row.agg.at("avg_regret").mean),
                 csv_num(row.agg.at("avg_regret").ci_half),
                 csv_num(row.agg.at("stability_mean").mean), csv_num(row.bound),
                 csv_num(slope), csv_num(intercept), csv_num(r2),
                 csv_num(row.agg.at("cum_loss").mean), csv_num(row.agg.at("best_value").mean),
                 row.eta > 0 ? csv_num(row.eta) : "", csv_num(cfg.replications)});
  }

  RunResult result;
  result.checks_passed = checks_passed;
  result.note = note;
  rounds.write(dir / "rounds.csv");
  summary.write(dir / "summary.csv");
  result.files = {dir / "rounds.csv", dir / "summary.csv"};
  return result;
}

RunResult run_probe_suite(const ExperimentConfig& cfg, const RunOverrides& overrides,
                          std::uint64_t seed, const std::filesystem::path& dir) {
  (void)overrides;
  const Box& box = *cfg.box;
  const OracleConfig exact{};  // pwl1d
  OracleConfig grid;
  grid.kind = OracleConfig::Kind::grid;
  grid.h = cfg.probe_grid_h;

  CsvFile out({"experiment_id", "suite", "oracle", "trials", "passes", "not_applicable"});
  bool all_pass = true;
  std::string note;

  struct Suite {
    std::string name;
    const OracleConfig* oracle;
  };
  const std::vector<Suite> suites = {
      {"monotone1", &exact}, {"monotone2", &exact}, {"monotone-oftpl", &exact},
      {"monotone1", &grid},  {"monotone2", &grid},  {"monotone-oftpl", &grid},
  };

  for (std::size_t s = 0; s < suites.size(); ++s) {
    const auto& suite = suites[s];
    int passes = 0;
    int na = 0;
    for (int k = 0; k < cfg.probes; ++k) {
      const RngStream ps = RngStream(seed).fork(s + 1).fork(static_cast<std::uint64_t>(k));
      StreamCursor cur(ps.fork(0));
      const int t = 1 + static_cast<int>(cur.next_uniform() * 12.0);
      const auto losses = oblivious_hinge_sequence(box, t, ps.fork(1));
      Vector sigma(box.dim());
      for (Eigen::Index i = 0; i < box.dim(); ++i) {
        sigma[i] = -std::log1p(-cur.next_uniform()) / 0.3;
      }
      const int coord = static_cast<int>(cur.next_uniform() * static_cast<double>(box.dim()));
      ProbeResult r;
      if (suite.name == "monotone1") {
        const double c = cur.next_uniform(0.01, 10.0);
        r = probe_monotone1(losses, box, coord, c, sigma, *suite.oracle);
      } else if (suite.name == "monotone2") {
        r = probe_monotone2(losses, box, coord, 1.0, sigma, *suite.oracle);
      } else {
        const auto guess = static_cast<GuessStrategy>(k % 3);
        const std::vector<LossFunction> prefix(losses.begin(), losses.end() - 1);
        const double l_t = std::max(
            1e-6, losses.back().lipschitz() + make_guess(guess, prefix).lipschitz());
        r = probe_monotone_oftpl(losses, box, coord, guess, l_t, sigma, *suite.oracle,
                                 exact);
      }
      if (!r.applicable) {
        ++na;
      } else if (r.pass) {
        ++passes;
      }
    }
    const int applicable = cfg.probes - na;
    if (passes != applicable) {
      all_pass = false;
      note = suite.name + " (" + suite.oracle->name() + ") failed " +
             std::to_string(applicable - passes) + " probes";
    }
    out.row({cfg.experiment_id, suite.name, suite.oracle->name(), csv_num(cfg.probes),
             csv_num(passes), csv_num(na)});
  }

  // One-step-ahead inequality on frozen traces, ftpl and oftpl variants.
  for (const auto variant : {Variant::ftpl, Variant::oftpl}) {
    LearnerConfig lcfg;
    lcfg.variant = variant;
    lcfg.eta = 0.5;
    lcfg.perturbation = PerturbationMode::frozen;
    if (variant == Variant::oftpl) lcfg.guess = GuessStrategy::last_loss;
    int passes = 0;
    for (int j = 0; j < cfg.btl_traces; ++j) {
      const std::uint64_t game_seed = derive_seed(seed, 77, static_cast<std::uint64_t>(j));
      const Adversary adv = make_adversary(
          cfg.adversary, box, cfg.btl_T, RngStream(game_seed).fork(kGameAdversaryTag));
      const GameTrace trace = play(lcfg, adv, box, cfg.btl_T, game_seed);
      const BtlReport report = probe_btl(trace, 201, exact);
      if (report.pass) ++passes;
    }
    if (passes != cfg.btl_traces) {
      all_pass = false;
      note = "be-the-leader probe failed";
    }
    out.row({cfg.experiment_id,
             variant == Variant::ftpl ? "btl-ftpl" : "btl-oftpl", "pwl1d",
             csv_num(cfg.btl_traces), csv_num(passes), csv_num(0)});
  }

  out.write(dir / "probes.csv");
  RunResult result;
  result.files = {dir / "probes.csv"};
  result.checks_passed = all_pass;
  result.note = note;
  return result;
}

RunResult run_oracle_audit(const ExperimentConfig& cfg, const RunOverrides& overrides,
                           std::uint64_t seed, const std::filesystem::path& dir) {
  (void)overrides;
  const Box& box = *cfg.box;
  CsvFile out({"experiment_id", "h", "queries", "contract_passes", "value_checks",
               "value_matches"});
  bool all_pass = true;
  std::string note;

  auto random_query = [&](const RngStream& qs) {
    StreamCursor cur(qs.fork(0));
    const int n_losses = static_cast<int>(cur.next_uniform() * 8.0);
    std::vector<LossFunction> losses;
    const double D = box.linf_diameter();
    for (int i = 0; i < n_losses; ++i) {
      // Centers snapped to the 1e-4 lattice so breakpoints land on the
      // brute-force grid used by the value cross-check.
      double c = cur.next_uniform(box.lo()[0], box.hi()[0]);
      c = std::round(c * 1e4) / 1e4;
      Vector center(1);
      center[0] = c;
      losses.push_back(LossFunction::hinge(std::move(center), D));
    }
    Vector sigma(1);
    sigma[0] = -std::log1p(-cur.next_uniform()) / 0.5;
    return OracleQuery{std::move(losses), std::nullopt, std::move(sigma), box};
  };

  for (std::size_t hi = 0; hi < cfg.grid_h_list.size(); ++hi) {
    const double h = cfg.grid_h_list[hi];
    int contract_passes = 0;
    int value_checks = 0;
    int value_matches = 0;
    for (int q = 0; q < cfg.queries; ++q) {
      const OracleQuery query =
          random_query(RngStream(seed).fork(hi + 1).fork(static_cast<std::uint64_t>(q)));
      const OracleAnswer exact_ans = pwl1d_minimize(query);
      const OracleAnswer grid_ans = grid_minimize(query, h);
      if (contract_check(grid_ans, query, exact_ans.value)) ++contract_passes;

      if (hi == 0 && q < std::min(cfg.queries, 200)) {
        // Brute force: every lattice point, every breakpoint, both ends.
        ++value_checks;
        double brute = std::numeric_limits<double>::infinity();
        const double lo = box.lo()[0];
        const double hi_ = box.hi()[0];
        const auto steps = static_cast<std::int64_t>(std::llround((hi_ - lo) / 1e-4));
        Vector x(1);
        for (std::int64_t kidx = 0; kidx <= steps; ++kidx) {
          x[0] = lo + 1e-4 * static_cast<double>(kidx);
          brute = std::min(brute, query.objective(x));
        }
        if (std::abs(exact_ans.value - brute) <= 1e-9) ++value_matches;
      }
    }
    if (contract_passes != cfg.queries || value_matches != value_checks) {
      all_pass = false;
      note = "oracle audit violations at h=" + csv_num(h);
    }
    out.row({cfg.experiment_id, csv_num(h), csv_num(cfg.queries), csv_num(contract_passes),
             csv_num(value_checks), csv_num(value_matches)});
  }

  out.write(dir / "audit.csv");
  RunResult result;
  result.files = {dir / "audit.csv"};
  result.checks_passed = all_pass;
  result.note = note;
  return result;
}

RunResult run_saddle_experiment(const ExperimentConfig& cfg, const RunOverrides& overrides,
                                std::uint64_t seed, const std::filesystem::path& dir) {
  (void)overrides;
  const SaddleSpec& spec = *cfg.saddle;
  const PayoffFunction payoff = spec.payoff == SaddleSpec::Payoff::bilinear
                                    ? PayoffFunction::bilinear(spec.box_x, spec.box_y)
                                    : PayoffFunction::hinge_game(spec.box_x, spec.box_y);

  LearnerConfig cx = spec.learner_x;
  LearnerConfig cy = spec.learner_y;
  if (spec.eta_default_x && cx.variant != Variant::ftl) {
    cx.eta = default_eta(payoff.lip_x, static_cast<int>(spec.box_x.dim()), spec.T);
  }
  if (spec.eta_default_y && cy.variant != Variant::ftl) {
    cy.eta = default_eta(payoff.lip_y, static_cast<int>(spec.box_y.dim()), spec.T);
  }

  OracleConfig reference{};  // pwl1d; structured payoffs have pwl slices
  if (cfg.reference_oracle) {
    reference = *cfg.reference_oracle;
  } else if (spec.box_x.dim() != 1) {
    reference.kind = OracleConfig::Kind::grid;
    reference.h = 0.01;
  }

  CsvFile summary({"T", "gap", "gap_alpha_band", "regret_x", "regret_y"});
  RunResult result;
  bool all_pass = true;
  std::string note;

  for (int run = 0; run < spec.runs; ++run) {
    const std::uint64_t run_seed = derive_seed(seed, 1, static_cast<std::uint64_t>(run));
    const SaddleResult sr = solve_saddle(payoff, spec.T, cx, cy, run_seed);
    const GapReport gap = duality_gap(payoff, sr.mix_x, sr.mix_y, reference);
    const RegretReport rx = regret(sr.trace_x, reference);
    const RegretReport ry = regret(sr.trace_y, reference);

    // Self-play identity: the certified gap never exceeds the regret sum
    // plus twice the certification error.
    if (!(gap.gap <=
          rx.avg_regret + ry.avg_regret + 2.0 * gap.alpha_band + 1e-9)) {
      all_pass = false;
      note = "gap exceeded regret_x + regret_y + 2*alpha on run " + std::to_string(run);
    }

    summary.row({csv_num(spec.T), csv_num(gap.gap), csv_num(gap.alpha_band),
                 csv_num(rx.avg_regret), csv_num(ry.avg_regret)});

    CsvFile rounds({"t", "x", "y", "payoff"});
    for (int t = 1; t <= spec.T; ++t) {
      const auto& px = sr.mix_x.atoms[static_cast<std::size_t>(t - 1)];
      const auto& py = sr.mix_y.atoms[static_cast<std::size_t>(t - 1)];
      auto joined = [](const Vector& v) {
        std::string s;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
          if (i) s += ';';
          s += csv_num(v[i]);
        }
        return s;
      };
      rounds.row({csv_num(t), joined(px), joined(py),
                  csv_num(sr.payoffs[static_cast<std::size_t>(t - 1)])});
    }
    const auto path = dir / ("saddle_rounds_run" + std::to_string(run) + ".csv");
    rounds.write(path);
    result.files.push_back(path);
  }

  summary.write(dir / "saddle_summary.csv");
  result.files.push_back(dir / "saddle_summary.csv");
  result.checks_passed = all_pass;
  result.note = note;
  return result;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const RunOverrides& overrides) {
  const std::uint64_t seed = overrides.seed.value_or(config.seed);
  const std::filesystem::path dir = overrides.out_dir.value_or(config.out_dir);
  std::filesystem::create_directories(dir);

  RunResult result;
  switch (config.kind) {
    case ExperimentKind::regret_sweep:
    case ExperimentKind::killer:
    case ExperimentKind::stability:
      result = run_game_experiment(config, overrides, seed, dir);
      break;
    case ExperimentKind::probe_suite:
      result = run_probe_suite(config, overrides, seed, dir);
      break;
    case ExperimentKind::oracle_audit:
      result = run_oracle_audit(config, overrides, seed, dir);
      break;
    case ExperimentKind::saddle:
      result = run_saddle_experiment(config, overrides, seed, dir);
      break;
  }
  write_manifest(config, dir, overrides, seed, result.files);
  result.files.push_back(dir / "manifest.json");
  return result;
}

}  // namespace ftpl
