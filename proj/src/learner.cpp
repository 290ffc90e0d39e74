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

#include "ftpl/learner.hpp"

#include <cmath>
#include <stdexcept>

namespace ftpl {

void LearnerConfig::validate() const {
  if (variant != Variant::ftl) {
    if (std::isnan(eta) || eta <= 0) {
      throw std::invalid_argument("learner: eta must be positive (or +inf)");
    }
  }
}

Vector perturbation_for_round(const LearnerState& state, const LearnerConfig& config,
                              Eigen::Index d, const RngStream& learner_stream) {
  if (config.variant == Variant::ftl || std::isinf(config.eta)) {
    return Vector::Zero(d);
  }
  if (config.perturbation == PerturbationMode::frozen) {
    if (!state.frozen_sigma) {
      throw std::invalid_argument("learner: frozen mode requires frozen_sigma");
    }
    return *state.frozen_sigma;
  }
  const auto t = static_cast<std::uint64_t>(state.round());
  return sample_perturbation(config.eta, d,
                             learner_stream.fork(kPerturbationTag).fork(t))
      .sigma;
}

namespace {

Prediction predict_impl(const LearnerState& state, const LearnerConfig& config,
                        const Box& box, const Vector& sigma,
                        const RngStream& learner_stream) {
  OracleQuery q{state.history, std::nullopt, sigma, box};
  if (config.variant == Variant::oftpl) {
    q.guess = make_guess(config.guess, state.history);
  }
  const auto t = static_cast<std::uint64_t>(state.round());
  const OracleAnswer a =
      oracle_minimize(config.oracle, q, learner_stream.fork(kOracleTag).fork(t));
  return Prediction{a.minimizer, sigma, a.guarantee, a.value};
}

}  // namespace

Point ftpl_predict(const LearnerState& state, const LearnerConfig& config,
                   const Box& box, const RngStream& learner_stream) {
  if (config.variant != Variant::ftpl) {
    throw std::invalid_argument("ftpl_predict: config variant must be ftpl");
  }
  const Vector sigma = perturbation_for_round(state, config, box.dim(), learner_stream);
  return predict_impl(state, config, box, sigma, learner_stream).x;
}

Point oftpl_predict(const LearnerState& state, const LearnerConfig& config,
                    const Box& box, const RngStream& learner_stream) {
  if (config.variant != Variant::oftpl) {
    throw std::invalid_argument("oftpl_predict: config variant must be oftpl");
  }
  const Vector sigma = perturbation_for_round(state, config, box.dim(), learner_stream);
  return predict_impl(state, config, box, sigma, learner_stream).x;
}

Point ftl_predict(const LearnerState& state, const LearnerConfig& config,
                  const Box& box) {
  if (config.variant != Variant::ftl) {
    throw std::invalid_argument("ftl_predict: config variant must be ftl");
  }
  if (state.history.empty()) {
    return box.lo();
  }
  const Vector sigma = Vector::Zero(box.dim());
  return predict_impl(state, config, box, sigma, RngStream(0)).x;
}

LossFunction make_guess(GuessStrategy strategy, const std::vector<LossFunction>& history) {
  switch (strategy) {
    case GuessStrategy::zero:
      return LossFunction::zero();
    case GuessStrategy::last_loss:
      return history.empty() ? LossFunction::zero() : history.back();
    case GuessStrategy::running_average: {
      if (history.empty()) return LossFunction::zero();
      const double w = 1.0 / static_cast<double>(history.size());
      std::vector<std::pair<double, LossFunction>> terms;
      terms.reserve(history.size());
      double lip_max = 0.0;
      for (const auto& f : history) {
        terms.emplace_back(w, f);
        lip_max = std::max(lip_max, f.lipschitz());
      }
      return LossFunction::with_lipschitz(LossFunction::scaled_sum(std::move(terms)),
                                          lip_max);
    }
  }
  throw std::logic_error("make_guess: unknown strategy");
}

double default_eta(double L, int d, int T) {
  if (!(L > 0) || d < 1 || T < 1) {
    throw std::invalid_argument("default_eta: need L > 0, d >= 1, T >= 1");
  }
  return 1.0 / (L * std::sqrt(static_cast<double>(d) * static_cast<double>(T)));
}

// ---------------------------------------------------------------------------
// Learner session
// ---------------------------------------------------------------------------

Learner::Learner(LearnerConfig config, Box box, RngStream learner_stream)
    : config_(config), box_(std::move(box)), stream_(learner_stream) {
  config_.validate();
  if (config_.variant != Variant::ftl &&
      config_.perturbation == PerturbationMode::frozen && !std::isinf(config_.eta)) {
    state_.frozen_sigma =
        sample_perturbation(config_.eta, box_.dim(),
                            stream_.fork(kPerturbationTag).fork(0))
            .sigma;
  }
  if (config_.oracle.kind == OracleConfig::Kind::pwl1d) {
    pwl_cache_.emplace(box_);
  } else if (config_.oracle.kind == OracleConfig::Kind::grid) {
    grid_cache_.emplace(box_, config_.oracle.h, config_.oracle.budget);
  }
}

Prediction Learner::predict_with_sigma(const Vector& sigma) const {
  std::optional<LossFunction> guess;
  if (config_.variant == Variant::oftpl) {
    guess = make_guess(config_.guess, state_.history);
  }
  OracleAnswer a;
  if (pwl_cache_) {
    a = pwl_cache_->minimize(sigma[0], guess ? &*guess : nullptr);
  } else if (grid_cache_) {
    a = grid_cache_->minimize(sigma, guess ? &*guess : nullptr);
  } else {
    OracleQuery q{state_.history, std::move(guess), sigma, box_};
    const auto t = static_cast<std::uint64_t>(state_.round());
    // ftl is stream-free; mirror the fixed stream of the pure predictor so
    // both paths agree for every backend.
    const RngStream base =
        (config_.variant == Variant::ftl) ? RngStream(0) : stream_;
    a = oracle_minimize(config_.oracle, q, base.fork(kOracleTag).fork(t));
  }
  return Prediction{a.minimizer, sigma, a.guarantee, a.value};
}

Prediction Learner::predict() const {
  if (config_.variant == Variant::ftl && state_.history.empty()) {
    return Prediction{box_.lo(), Vector::Zero(box_.dim()), OracleGuarantee::exact(),
                      0.0};
  }
  const Vector sigma = perturbation_for_round(state_, config_, box_.dim(), stream_);
  return predict_with_sigma(sigma);
}

void Learner::observe(const LossFunction& f) {
  if (pwl_cache_) pwl_cache_->add(f);
  if (grid_cache_) grid_cache_->add(f);
  state_.history.push_back(f);
}

OracleAnswer Learner::prefix_best() const {
  const Vector zero = Vector::Zero(box_.dim());
  if (pwl_cache_) return pwl_cache_->minimize(0.0);
  if (grid_cache_) return grid_cache_->minimize(zero);
  return reference_minimum(state_.history, box_, config_.oracle);
}

}  // namespace ftpl
