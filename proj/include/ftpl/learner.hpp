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

#ifndef FTPL_LEARNER_HPP_
#define FTPL_LEARNER_HPP_

#include <optional>
#include <vector>

#include "ftpl/box.hpp"
#include "ftpl/loss.hpp"
#include "ftpl/oracle.hpp"
#include "ftpl/random.hpp"

namespace ftpl {

enum class Variant { ftpl, oftpl, ftl };
enum class GuessStrategy { zero, last_loss, running_average };
enum class PerturbationMode { fresh, frozen };

struct LearnerConfig {
  Variant variant = Variant::ftpl;
  // Exponential perturbation rate; E[sigma_i] = 1/eta. +inf is the
  // deterministic sentinel (sigma = 0), used to exhibit the deterministic
  // failure mode. Ignored by ftl.
  double eta = 0.1;
  OracleConfig oracle;
  PerturbationMode perturbation = PerturbationMode::fresh;
  GuessStrategy guess = GuessStrategy::zero;  // oftpl only

  void validate() const;  // throws std::invalid_argument
};

// History of observed losses; round t = history.size() + 1. frozen_sigma is
// present exactly when the perturbation mode is frozen.
struct LearnerState {
  std::vector<LossFunction> history;
  std::optional<Vector> frozen_sigma;

  int round() const { return static_cast<int>(history.size()) + 1; }
};

// Stream-fork tags used to derive per-purpose randomness from a learner
// stream. Fresh perturbations additionally fork by round index, so frozen
// and fresh modes share one layout.
inline constexpr std::uint64_t kPerturbationTag = 1;
inline constexpr std::uint64_t kOracleTag = 2;

// The perturbation vector the learner uses at round t of `state`:
// zero for ftl or eta = +inf, the frozen vector in frozen mode, and a fresh
// per-round draw otherwise.
Vector perturbation_for_round(const LearnerState& state, const LearnerConfig& config,
                              Eigen::Index d, const RngStream& learner_stream);

// One prediction: the chosen point plus everything the harness records.
struct Prediction {
  Point x;
  Vector sigma;
  OracleGuarantee guarantee;
  double objective_value = 0.0;
};

// Prediction rules, as pure functions of (state, config, stream). These
// enumerate the oracle query from scratch; game loops use the Learner class
// below, which produces identical output through incremental caches.
Point ftpl_predict(const LearnerState& state, const LearnerConfig& config,
                   const Box& box, const RngStream& learner_stream);
Point oftpl_predict(const LearnerState& state, const LearnerConfig& config,
                    const Box& box, const RngStream& learner_stream);
// Unperturbed leader; by convention the round-1 prediction is the box's
// lower corner.
Point ftl_predict(const LearnerState& state, const LearnerConfig& config,
                  const Box& box);

// g_t from the observed history: zero, f_{t-1}, or the running average
// (1/(t-1)) * sum f_i. The latter two fall back to zero at t = 1. Declared
// Lipschitz constants: 0, L(f_{t-1}), max_i L(f_i).
LossFunction make_guess(GuessStrategy strategy, const std::vector<LossFunction>& history);

// 1 / (L * sqrt(d * T)): balances the perturbation cost against the
// stability cost when the oracle error is negligible.
double default_eta(double L, int d, int T);

// Stateful learner session owning the history and (when the backend allows)
// an incremental oracle cache. predict() is a pure function of the current
// state, so calling it twice without observe() returns identical results.
class Learner {
 public:
  Learner(LearnerConfig config, Box box, RngStream learner_stream);

  Prediction predict() const;
  void observe(const LossFunction& f);

  int round() const { return state_.round(); }
  const LearnerState& state() const { return state_; }
  const LearnerConfig& config() const { return config_; }
  const Box& box() const { return box_; }

  // Minimum of the observed cumulative loss over the box via this learner's
  // own backend (sigma = 0); heuristic backends give a heuristic value.
  OracleAnswer prefix_best() const;

 private:
  Prediction predict_with_sigma(const Vector& sigma) const;

  LearnerConfig config_;
  Box box_;
  RngStream stream_;
  LearnerState state_;
  std::optional<Pwl1dAccumulator> pwl_cache_;
  std::optional<GridAccumulator> grid_cache_;
};

}  // namespace ftpl

#endif  // FTPL_LEARNER_HPP_
