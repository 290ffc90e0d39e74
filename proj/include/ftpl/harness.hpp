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

#ifndef FTPL_HARNESS_HPP_
#define FTPL_HARNESS_HPP_

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ftpl/adversary.hpp"
#include "ftpl/box.hpp"
#include "ftpl/learner.hpp"
#include "ftpl/loss.hpp"
#include "ftpl/oracle.hpp"

namespace ftpl {

// Game seeds derive per-purpose streams by fork tag; the learner's stream is
// fork(kGameLearnerTag) of RngStream(seed), generators conventionally use
// fork(kGameAdversaryTag).
inline constexpr std::uint64_t kGameLearnerTag = 1;
inline constexpr std::uint64_t kGameAdversaryTag = 2;

struct RoundRecord {
  int t = 0;
  Vector sigma;
  Point x;
  std::string loss_descriptor;
  double loss_value = 0.0;
  double alpha = 0.0;  // oracle certificate for this round's prediction
  double beta = 0.0;   // (NaN for heuristic backends)
  // Minimum of the cumulative loss after this round via the learner's own
  // backend; NaN unless per-round diagnostics were requested.
  double prefix_best = 0.0;
};

struct GameTrace {
  LearnerConfig learner_config;
  std::string adversary_descriptor;
  Box box;
  int T = 0;
  std::uint64_t seed = 0;
  std::vector<LossFunction> losses;
  std::vector<RoundRecord> rounds;
  std::optional<Vector> frozen_sigma;

  double cumulative_loss() const;
  // Mean of ||x_t - x_{t+1}||_1 over consecutive recorded rounds.
  double stability_mean() const;
};

// Simultaneous-move loop: x_t is computed from f_{<t} only, and the
// adversary's f_t from x_{<t} only (or is pre-fixed). Killer mode receives
// the current prediction and therefore requires a deterministic learner.
// Failures during round t are rethrown with the round index attached.
GameTrace play(const LearnerConfig& learner_config, const Adversary& adversary,
               const Box& box, int T, std::uint64_t seed,
               bool per_round_diagnostics = false);

struct RegretReport {
  double avg_regret = 0.0;
  Point best_point;
  // Certified lower bound on the best fixed action's cumulative loss (the
  // reference value minus its alpha); avg_regret never understates regret.
  double best_value = 0.0;
  double best_alpha = 0.0;
  double learner_cum_loss = 0.0;
  double stability_mean = 0.0;
  double gamma_worst = 0.0;
};

RegretReport regret(const GameTrace& trace, const OracleConfig& reference);

// ---------------------------------------------------------------------------
// Probes: single-inequality checks evaluated on explicit histories and
// perturbations, all at tolerance 1e-9.
// ---------------------------------------------------------------------------

struct ProbeResult {
  bool applicable = true;
  bool pass = false;
  double slack = 0.0;  // lhs - rhs; negative means violated
};

inline constexpr double kProbeTol = 1e-9;

// Coordinate monotonicity of the prediction under sigma -> sigma + c*e_i:
//   x_{t,i}(sigma + c e_i) >= x_{t,i}(sigma) - 2*gamma(sigma)/c - beta.
// With an exact oracle the right side reduces to x_{t,i}(sigma).
ProbeResult probe_monotone1(const std::vector<LossFunction>& history, const Box& box,
                            int coord, double c, const Vector& sigma,
                            const OracleConfig& oracle);

// Paired monotonicity of consecutive predictions under the 100*L*d shift:
//   min(x_{t,i}(s'), x_{t+1,i}(s')) >= max(x_{t,i}(s), x_{t+1,i}(s))
//       - |x_{t,i}(s) - x_{t+1,i}(s)|/10 - 3*gamma(s)/(100*L*d) - beta,
// guarded by ||x_t(s) - x_{t+1}(s)||_1 <= 10*d*|x_{t,i}(s) - x_{t+1,i}(s)|
// (reported not-applicable when the guard fails). `history_then_next` holds
// f_1..f_t; x_t uses the first t-1 losses and x_{t+1} all t.
ProbeResult probe_monotone2(const std::vector<LossFunction>& history_then_next,
                            const Box& box, int coord, double lipschitz,
                            const Vector& sigma, const OracleConfig& oracle);

// Optimistic variant: x_t minimizes sum_{i<t} f_i + g_t - sigma via `oracle`;
// the one-step leader minimizes sum_{i<=t} f_i - sigma via an exact oracle.
// Under sigma' = sigma + 100*l_t*d*e_i, checks
//   leader_i(s') >= x_{t,i}(s) - |x_{t,i}(s) - leader_i(s)|/10
//                   - gamma(s)/(100*l_t*d),
// the symmetric inequality with the roles swapped, and exact-leader
// monotonicity leader_i(s') >= leader_i(s). Same applicability guard as
// probe_monotone2 with the leader in place of x_{t+1}.
ProbeResult probe_monotone_oftpl(const std::vector<LossFunction>& history_then_next,
                                 const Box& box, int coord, GuessStrategy guess,
                                 double l_t, const Vector& sigma,
                                 const OracleConfig& oracle,
                                 const OracleConfig& exact_oracle);

// One-step-ahead ("be the perturbed leader") inequality over a frozen-sigma
// trace, checked against every comparator on a uniform grid:
//   ftpl:  sum_t [f_t(x_{t+1}) - f_t(x*)] <= gamma*T + <sigma, x_2 - x*>
//   oftpl: sum_t [g_t(x_t) - g_t(leader_{t+1})]
//            + sum_t [f_t(leader_{t+1}) - f_t(x*)]
//          <= <sigma, leader_2 - x*> + gamma*(T-1)
// x_{t+1} replays the trace's own oracle on the extended history under the
// same sigma; leaders require an exact oracle.
struct BtlReport {
  bool pass = false;
  double worst_slack = 0.0;
  int comparators = 0;
};

BtlReport probe_btl(const GameTrace& trace, int grid_points_per_axis,
                    const OracleConfig& exact_oracle);

// ---------------------------------------------------------------------------
// Aggregate checks
// ---------------------------------------------------------------------------

// Monte Carlo check of the prediction-stability bound
//   E||x_t - x_{t+1}||_1 <= 125*eta*L*d^2*D + beta*d/(20*eta*L) + 2*beta*d
//                           + alpha/(20*L)
// over >= 30 frozen-sigma replications; pass iff the 95% CI upper edge stays
// below the bound.
struct StabilityCheck {
  double mean = 0.0;
  double sd = 0.0;
  double ci_half = 0.0;
  double bound = 0.0;
  bool pass = false;
  int replications = 0;
};

StabilityCheck stability_check(const std::vector<GameTrace>& traces, double eta,
                               double L, int d, double D,
                               const OracleGuarantee& guarantee);

struct RatePoint {
  int T = 0;
  double mean_regret = 0.0;
  double ci_half = 0.0;
};

struct RateFit {
  std::vector<RatePoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Least squares of ln(mean_regret) on ln(T); needs >= 4 distinct T values and
// strictly positive regrets.
RateFit rate_fit(std::vector<RatePoint> points);

// ---------------------------------------------------------------------------
// Replication
// ---------------------------------------------------------------------------

struct Aggregate {
  double mean = 0.0;
  double sd = 0.0;       // NaN when undefined (n = 1)
  double ci_half = 0.0;  // 1.96 * sd / sqrt(n); 0 when n = 1
  int n = 0;
  bool sd_defined = false;
};

using MetricMap = std::map<std::string, double>;

// Runs `run_one(rep)` for rep = 0..n-1 on up to `workers` threads and
// aggregates each metric. Results are reduced in replication order, so the
// aggregate does not depend on the schedule. A failing replication aborts
// with its index in the message.
std::map<std::string, Aggregate> replicate(
    const std::function<MetricMap(int)>& run_one, int n, int workers);

}  // namespace ftpl

#endif  // FTPL_HARNESS_HPP_
