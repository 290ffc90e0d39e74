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

#ifndef FTPL_SADDLE_HPP_
#define FTPL_SADDLE_HPP_

#include <functional>
#include <vector>

#include "ftpl/box.hpp"
#include "ftpl/harness.hpp"
#include "ftpl/learner.hpp"
#include "ftpl/loss.hpp"

namespace ftpl {

// Two-player payoff M(x, y): the x-player minimizes, the y-player maximizes.
// The slice builders produce each player's per-round loss; the defaults wrap
// eval as opaque losses, while structured payoffs (bilinear, hinge) provide
// piecewise-linear slices so the exact oracle applies.
struct PayoffFunction {
  std::function<double(const Vector&, const Vector&)> eval;
  double lip_x = 0.0;
  double lip_y = 0.0;
  Box box_x;
  Box box_y;
  std::function<LossFunction(const Vector& y)> x_loss;  // x -> M(x, y_t)
  std::function<LossFunction(const Vector& x)> y_loss;  // y -> -M(x_t, y)

  static PayoffFunction opaque(std::function<double(const Vector&, const Vector&)> eval,
                               double lip_x, double lip_y, Box box_x, Box box_y);
  // M(x, y) = x * y on 1-d boxes; slices are linear, so both players can run
  // the exact oracle.
  static PayoffFunction bilinear(Box box_x, Box box_y);
  // M(x, y) = max{0, D/2 - ||x - y||_1} with D the x-box diameter; the
  // x-player's round losses are exactly the hinge family.
  static PayoffFunction hinge_game(Box box_x, Box box_y);
};

// Uniform empirical distribution over played points.
struct MixedStrategy {
  std::vector<Point> atoms;
};

struct SaddleResult {
  MixedStrategy mix_x;
  MixedStrategy mix_y;
  GameTrace trace_x;  // x-player's losses f_t = M(., y_t)
  GameTrace trace_y;  // y-player's losses h_t = -M(x_t, .)
  std::vector<double> payoffs;  // M(x_t, y_t) per round
};

// Self-play: each round both players predict simultaneously, then the
// x-player observes M(., y_t) and the y-player observes -M(x_t, .).
SaddleResult solve_saddle(const PayoffFunction& payoff, int T,
                          const LearnerConfig& config_x, const LearnerConfig& config_y,
                          std::uint64_t seed);

// Same, with each player's game seed pinned explicitly (the one-seed
// overload derives them from `seed`).
SaddleResult solve_saddle_seeded(const PayoffFunction& payoff, int T,
                                 const LearnerConfig& config_x,
                                 const LearnerConfig& config_y, std::uint64_t seed_x,
                                 std::uint64_t seed_y);

struct GapReport {
  double gap = 0.0;         // certified max_y side minus certified min_x side
  double alpha_band = 0.0;  // one-sided certification error of each side
  double max_side = 0.0;    // max_y avg_t M(x_t, y)
  double min_side = 0.0;    // min_x avg_t M(x, y_t)
};

// Duality gap of the empirical mixtures, certified through `reference` on
// each marginal average; gap >= -2*alpha_band up to certification error.
GapReport duality_gap(const PayoffFunction& payoff, const MixedStrategy& mix_x,
                      const MixedStrategy& mix_y, const OracleConfig& reference);

}  // namespace ftpl

#endif  // FTPL_SADDLE_HPP_
