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

#include "ftpl/saddle.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ftpl {

PayoffFunction PayoffFunction::opaque(
    std::function<double(const Vector&, const Vector&)> eval, double lip_x,
    double lip_y, Box box_x, Box box_y) {
  PayoffFunction m{std::move(eval), lip_x, lip_y, std::move(box_x), std::move(box_y),
                   {}, {}};
  m.x_loss = [m_eval = m.eval, lip_x](const Vector& y) {
    return LossFunction::opaque([m_eval, y](const Vector& x) { return m_eval(x, y); },
                                lip_x, "payoff-slice-x");
  };
  m.y_loss = [m_eval = m.eval, lip_y](const Vector& x) {
    return LossFunction::opaque([m_eval, x](const Vector& y) { return -m_eval(x, y); },
                                lip_y, "payoff-slice-y");
  };
  return m;
}

PayoffFunction PayoffFunction::bilinear(Box box_x, Box box_y) {
  if (box_x.dim() != 1 || box_y.dim() != 1) {
    throw std::invalid_argument("bilinear payoff: boxes must be 1-dimensional");
  }
  const double lip_x = std::max(std::abs(box_y.lo()[0]), std::abs(box_y.hi()[0]));
  const double lip_y = std::max(std::abs(box_x.lo()[0]), std::abs(box_x.hi()[0]));
  PayoffFunction m{[](const Vector& x, const Vector& y) { return x[0] * y[0]; },
                   lip_x, lip_y, std::move(box_x), std::move(box_y), {}, {}};
  m.x_loss = [](const Vector& y) {
    Vector c(1);
    c[0] = y[0];
    return LossFunction::linear(std::move(c));
  };
  m.y_loss = [](const Vector& x) {
    Vector c(1);
    c[0] = -x[0];
    return LossFunction::linear(std::move(c));
  };
  return m;
}

PayoffFunction PayoffFunction::hinge_game(Box box_x, Box box_y) {
  if (box_x.dim() != box_y.dim()) {
    throw std::invalid_argument("hinge payoff: boxes must share a dimension");
  }
  const double diameter = box_x.linf_diameter();
  PayoffFunction m{[diameter](const Vector& x, const Vector& y) {
                     return std::max(0.0, diameter / 2.0 - l1_distance(x, y));
                   },
                   1.0, 1.0, std::move(box_x), std::move(box_y), {}, {}};
  m.x_loss = [diameter](const Vector& y) { return LossFunction::hinge(y, diameter); };
  m.y_loss = [diameter](const Vector& x) {
    return LossFunction::scaled_sum({{-1.0, LossFunction::hinge(x, diameter)}});
  };
  return m;
}

namespace {

std::optional<Vector> frozen_sigma_of(const Learner& learner) {
  const auto& c = learner.config();
  if (c.variant == Variant::ftl || std::isinf(c.eta)) {
    return Vector::Zero(learner.box().dim());
  }
  if (c.perturbation == PerturbationMode::frozen) {
    return learner.state().frozen_sigma;
  }
  return std::nullopt;
}

}  // namespace

SaddleResult solve_saddle(const PayoffFunction& payoff, int T,
                          const LearnerConfig& config_x, const LearnerConfig& config_y,
                          std::uint64_t seed) {
  const RngStream root(seed);
  return solve_saddle_seeded(payoff, T, config_x, config_y, root.fork(1).word(0),
                             root.fork(2).word(0));
}

SaddleResult solve_saddle_seeded(const PayoffFunction& payoff, int T,
                                 const LearnerConfig& config_x,
                                 const LearnerConfig& config_y, std::uint64_t seed_x,
                                 std::uint64_t seed_y) {
  if (T < 1) throw std::invalid_argument("solve_saddle: T must be >= 1");
  config_x.validate();
  config_y.validate();

  std::optional<Learner> lx_holder;
  std::optional<Learner> ly_holder;
  try {
    lx_holder.emplace(config_x, payoff.box_x, RngStream(seed_x).fork(kGameLearnerTag));
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("solve_saddle: x-player: ") + e.what());
  }
  try {
    ly_holder.emplace(config_y, payoff.box_y, RngStream(seed_y).fork(kGameLearnerTag));
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("solve_saddle: y-player: ") + e.what());
  }
  Learner& lx = *lx_holder;
  Learner& ly = *ly_holder;

  SaddleResult result{{},
                      {},
                      GameTrace{config_x, "self-play-x", payoff.box_x, T, seed_x, {}, {}, {}},
                      GameTrace{config_y, "self-play-y", payoff.box_y, T, seed_y, {}, {}, {}},
                      {}};
  result.trace_x.frozen_sigma = frozen_sigma_of(lx);
  result.trace_y.frozen_sigma = frozen_sigma_of(ly);

  for (int t = 1; t <= T; ++t) {
    const char* side = "x-player";
    try {
      const Prediction px = lx.predict();
      side = "y-player";
      const Prediction py = ly.predict();

      const LossFunction fx = payoff.x_loss(py.x);
      const LossFunction fy = payoff.y_loss(px.x);
      side = "x-player";
      lx.observe(fx);
      side = "y-player";
      ly.observe(fy);

      const double nan = std::numeric_limits<double>::quiet_NaN();
      result.trace_x.rounds.push_back(RoundRecord{t, px.sigma, px.x, fx.descriptor(),
                                                  fx(px.x), px.guarantee.alpha,
                                                  px.guarantee.beta, nan});
      result.trace_y.rounds.push_back(RoundRecord{t, py.sigma, py.x, fy.descriptor(),
                                                  fy(py.x), py.guarantee.alpha,
                                                  py.guarantee.beta, nan});
      result.trace_x.losses.push_back(fx);
      result.trace_y.losses.push_back(fy);
      result.mix_x.atoms.push_back(px.x);
      result.mix_y.atoms.push_back(py.x);
      result.payoffs.push_back(payoff.eval(px.x, py.x));
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "solve_saddle: round " << t << " (" << side << "): " << e.what();
      throw std::runtime_error(os.str());
    }
  }
  return result;
}

GapReport duality_gap(const PayoffFunction& payoff, const MixedStrategy& mix_x,
                      const MixedStrategy& mix_y, const OracleConfig& reference) {
  if (mix_x.atoms.empty() || mix_y.atoms.empty()) {
    throw std::invalid_argument("duality_gap: mixtures must be nonempty");
  }
  const double wx = 1.0 / static_cast<double>(mix_x.atoms.size());
  const double wy = 1.0 / static_cast<double>(mix_y.atoms.size());

  // min_x avg_t M(x, y_t): average of the x-player slices.
  std::vector<std::pair<double, LossFunction>> x_terms;
  x_terms.reserve(mix_y.atoms.size());
  for (const auto& y : mix_y.atoms) x_terms.emplace_back(wy, payoff.x_loss(y));
  const OracleAnswer min_ans = reference_minimum(
      {LossFunction::scaled_sum(std::move(x_terms))}, payoff.box_x, reference);

  // max_y avg_t M(x_t, y) = -min_y avg_t [-M(x_t, y)].
  std::vector<std::pair<double, LossFunction>> y_terms;
  y_terms.reserve(mix_x.atoms.size());
  for (const auto& x : mix_x.atoms) y_terms.emplace_back(wx, payoff.y_loss(x));
  const OracleAnswer max_ans = reference_minimum(
      {LossFunction::scaled_sum(std::move(y_terms))}, payoff.box_y, reference);

  GapReport report;
  report.min_side = min_ans.value;
  report.max_side = -max_ans.value;
  report.gap = report.max_side - report.min_side;
  if (min_ans.guarantee.certified && max_ans.guarantee.certified) {
    report.alpha_band = std::max(min_ans.guarantee.alpha, max_ans.guarantee.alpha);
  } else {
    report.alpha_band = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

}  // namespace ftpl
