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

#include <cmath>

#include <doctest.h>

#include "ftpl/saddle.hpp"

using namespace ftpl;

namespace {

Vector vec1(double x) {
  Vector v(1);
  v[0] = x;
  return v;
}

Box box1(double lo, double hi) { return Box(vec1(lo), vec1(hi)); }

LearnerConfig exact_ftpl(double eta) {
  LearnerConfig c;
  c.variant = Variant::ftpl;
  c.eta = eta;
  return c;
}

}  // namespace

TEST_CASE("a zero payoff has zero duality gap for any play") {
  const Box bx = box1(-1, 1);
  const auto zero = PayoffFunction::opaque(
      [](const Vector&, const Vector&) { return 0.0; }, 0.1, 0.1, bx, bx);
  LearnerConfig cfg = exact_ftpl(0.5);
  cfg.oracle.kind = OracleConfig::Kind::grid;
  cfg.oracle.h = 0.05;
  const SaddleResult sr = solve_saddle(zero, 8, cfg, cfg, 1);
  OracleConfig ref;
  ref.kind = OracleConfig::Kind::grid;
  ref.h = 0.05;
  const GapReport gap = duality_gap(zero, sr.mix_x, sr.mix_y, ref);
  CHECK(gap.gap == doctest::Approx(0.0));
}

TEST_CASE("hand-checked bilinear gap for two-point mixtures") {
  const auto payoff = PayoffFunction::bilinear(box1(-1, 1), box1(-1, 1));
  MixedStrategy mx{{vec1(-1), vec1(1)}};
  MixedStrategy my{{vec1(-1), vec1(1)}};
  // avg_t M(x_t, y) = 0 for every y and avg_t M(x, y_t) = 0 for every x, so
  // both certified sides are zero.
  const GapReport gap = duality_gap(payoff, mx, my, OracleConfig{});
  CHECK(gap.max_side == doctest::Approx(0.0));
  CHECK(gap.min_side == doctest::Approx(0.0));
  CHECK(gap.gap == doctest::Approx(0.0));
  CHECK(gap.alpha_band == 0.0);
}

TEST_CASE("bilinear self-play: gap shrinks with the horizon") {
  const auto payoff = PayoffFunction::bilinear(box1(-1, 1), box1(-1, 1));
  auto gap_at = [&](int T) {
    const LearnerConfig cfg = exact_ftpl(default_eta(1, 1, T));
    const SaddleResult sr = solve_saddle(payoff, T, cfg, cfg, 33);
    return duality_gap(payoff, sr.mix_x, sr.mix_y, OracleConfig{}).gap;
  };
  const double g_small = gap_at(64);
  const double g_big = gap_at(2048);
  CHECK(g_big <= 0.35);
  CHECK(g_big <= g_small + 0.05);
  CHECK(g_big >= -1e-9);  // exact certification keeps the gap nonnegative
}

TEST_CASE("gap never exceeds the regret sum plus certification error") {
  const auto payoff = PayoffFunction::bilinear(box1(-1, 1), box1(-1, 1));
  for (int run = 0; run < 5; ++run) {
    const int T = 512;
    const LearnerConfig cfg = exact_ftpl(default_eta(1, 1, T));
    const SaddleResult sr = solve_saddle(payoff, T, cfg, cfg, 100 + run);
    const GapReport gap = duality_gap(payoff, sr.mix_x, sr.mix_y, OracleConfig{});
    const RegretReport rx = regret(sr.trace_x, OracleConfig{});
    const RegretReport ry = regret(sr.trace_y, OracleConfig{});
    CHECK(gap.gap <= rx.avg_regret + ry.avg_regret + 2 * gap.alpha_band + 1e-9);
  }
}

TEST_CASE("point masses at a pure saddle certify a near-zero gap") {
  const Box bx = box1(-1, 1);
  // M(x, y) = x^2 - y^2 has its saddle at the origin.
  const auto payoff = PayoffFunction::opaque(
      [](const Vector& x, const Vector& y) { return x[0] * x[0] - y[0] * y[0]; }, 2.0,
      2.0, bx, bx);
  const MixedStrategy at_zero{{vec1(0)}};
  OracleConfig ref;
  ref.kind = OracleConfig::Kind::grid;
  ref.h = 0.01;
  const GapReport gap = duality_gap(payoff, at_zero, at_zero, ref);
  CHECK(gap.gap <= 2 * gap.alpha_band + 1e-12);
  CHECK(gap.gap >= -2 * gap.alpha_band - 1e-12);
}

TEST_CASE("random mixtures on the bilinear game have nonnegative certified gap") {
  const auto payoff = PayoffFunction::bilinear(box1(-1, 1), box1(-1, 1));
  RngStream s(64);
  for (int k = 0; k < 30; ++k) {
    MixedStrategy mx, my;
    const int n = 1 + static_cast<int>(s.uniform(3 * k) * 6);
    for (int i = 0; i < n; ++i) {
      mx.atoms.push_back(vec1(s.fork(k).uniform(i, -1, 1)));
      my.atoms.push_back(vec1(s.fork(k + 999).uniform(i, -1, 1)));
    }
    const GapReport gap = duality_gap(payoff, mx, my, OracleConfig{});
    CHECK(gap.gap >= -2 * gap.alpha_band - 1e-9);  // exact reference: band 0
  }
}

TEST_CASE("hinge payoff feeds the x-player exactly the hinge family") {
  const Box bx = box1(-5, 5);
  const auto payoff = PayoffFunction::hinge_game(bx, bx);
  const LearnerConfig cfg = exact_ftpl(0.3);
  const SaddleResult sr = solve_saddle(payoff, 12, cfg, cfg, 3);
  for (int t = 0; t < 12; ++t) {
    CHECK(sr.trace_x.losses[t].descriptor().substr(0, 5) == "hinge");
    // Per-round value of the x-player's loss is the payoff at that round.
    CHECK(sr.trace_x.rounds[t].loss_value ==
          doctest::Approx(sr.payoffs[t]).epsilon(1e-12));
    // Peak D/2 at the opponent's point.
    CHECK(sr.trace_x.losses[t](sr.mix_y.atoms[t]) == doctest::Approx(5.0));
  }
}

TEST_CASE("mixtures hold exactly the played points, all inside their boxes") {
  const auto payoff = PayoffFunction::bilinear(box1(-1, 1), box1(-2, 2));
  const LearnerConfig cfg = exact_ftpl(0.2);
  const SaddleResult sr = solve_saddle(payoff, 40, cfg, cfg, 9);
  REQUIRE(sr.mix_x.atoms.size() == 40);
  REQUIRE(sr.mix_y.atoms.size() == 40);
  for (int t = 0; t < 40; ++t) {
    CHECK(payoff.box_x.contains(sr.mix_x.atoms[t]));
    CHECK(payoff.box_y.contains(sr.mix_y.atoms[t]));
    CHECK(sr.mix_x.atoms[t] == sr.trace_x.rounds[t].x);
    CHECK(sr.mix_y.atoms[t] == sr.trace_y.rounds[t].x);
  }
}

TEST_CASE("swapping players with swapped seeds mirrors the mixtures") {
  const Box bx = box1(-1, 1);
  const auto m = PayoffFunction::bilinear(bx, bx);
  // Mirrored payoff N(u, v) = -M(v, u) = -u*v with pwl slices.
  PayoffFunction n{[](const Vector& u, const Vector& v) { return -u[0] * v[0]; },
                   1.0, 1.0, bx, bx, {}, {}};
  n.x_loss = [](const Vector& v) { return LossFunction::linear(vec1(-v[0])); };
  n.y_loss = [](const Vector& u) { return LossFunction::linear(vec1(u[0])); };

  const LearnerConfig cfg = exact_ftpl(0.25);
  const SaddleResult game1 = solve_saddle_seeded(m, 50, cfg, cfg, 111, 222);
  const SaddleResult game2 = solve_saddle_seeded(n, 50, cfg, cfg, 222, 111);
  for (int t = 0; t < 50; ++t) {
    CHECK(game1.mix_x.atoms[t] == game2.mix_y.atoms[t]);
    CHECK(game1.mix_y.atoms[t] == game2.mix_x.atoms[t]);
  }
}

TEST_CASE("oracle failures carry the player tag") {
  const Box bx = box1(-1, 1);
  // Opaque payoff slices cannot be handled by the exact oracle; the
  // x-player trips first when it observes its round-one loss.
  const auto payoff = PayoffFunction::opaque(
      [](const Vector& x, const Vector& y) { return x[0] * x[0] + y[0]; }, 2.0, 1.0,
      bx, bx);
  const LearnerConfig cfg = exact_ftpl(0.5);
  CHECK_THROWS_WITH_AS(solve_saddle(payoff, 4, cfg, cfg, 1),
                       doctest::Contains("x-player"), std::runtime_error);
}

TEST_CASE("input validation") {
  const auto payoff = PayoffFunction::bilinear(box1(-1, 1), box1(-1, 1));
  const LearnerConfig cfg = exact_ftpl(0.5);
  CHECK_THROWS_AS(solve_saddle(payoff, 0, cfg, cfg, 1), std::invalid_argument);
  CHECK_THROWS_AS(duality_gap(payoff, MixedStrategy{}, MixedStrategy{{vec1(0)}},
                              OracleConfig{}),
                  std::invalid_argument);
}
