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

#ifndef FTPL_ADVERSARY_HPP_
#define FTPL_ADVERSARY_HPP_

#include <functional>
#include <string>
#include <vector>

#include "ftpl/box.hpp"
#include "ftpl/loss.hpp"
#include "ftpl/random.hpp"

namespace ftpl {

// T hinge losses with centers drawn uniformly from the box; the hinge
// diameter parameter is the box's sup-norm diameter, so each loss is
// 1-Lipschitz with peak D/2. The whole sequence is fixed before play.
std::vector<LossFunction> oblivious_hinge_sequence(const Box& box, int T,
                                                   const RngStream& stream);

// Smooth non-convex family f_t(x) = (L/freq) * sum_i sin(freq*x_i + phi_ti)
// with phases uniform on [0, 2*pi); l1-Lipschitz with constant L.
std::vector<LossFunction> oblivious_sinusoid_sequence(const Box& box, int T,
                                                      double L, double freq,
                                                      const RngStream& stream);

// Hinge sequence whose center changes only every `block` rounds; inside a
// block f_t = f_{t-1}, so a last-loss guess is exact there.
std::vector<LossFunction> slowly_varying_sequence(const Box& box, int T, int block,
                                                  const RngStream& stream);

// Hinge centered on the learner's current prediction: f_t(x_t) = diameter/2.
// Legal only against a deterministic learner, whose current prediction is a
// function of the published history.
LossFunction killer_next_loss(const Point& x_t, double diameter);

// Loss-choosing protocol consumed by the game loop. Oblivious adversaries
// hold their fixed sequence and never receive predictions; adaptive ones see
// past predictions x_{<t} only. The killer additionally receives the current
// prediction, which the game loop only permits for deterministic learners.
class Adversary {
 public:
  enum class Mode { oblivious, adaptive, killer };

  static Adversary oblivious(std::vector<LossFunction> sequence, std::string descriptor);
  static Adversary adaptive(
      std::function<LossFunction(int t, const std::vector<Point>& past)> next,
      std::string descriptor);
  static Adversary killer(double diameter);

  Mode mode() const { return mode_; }
  const std::string& descriptor() const { return descriptor_; }

  // t is 1-based. `current` is non-null only for killer mode.
  LossFunction next(int t, const std::vector<Point>& past, const Point* current) const;

 private:
  Adversary() = default;
  Mode mode_ = Mode::oblivious;
  std::string descriptor_;
  std::vector<LossFunction> sequence_;
  std::function<LossFunction(int, const std::vector<Point>&)> next_fn_;
  double killer_diameter_ = 0.0;
};

// Adaptive adversary that chases the previous prediction with a hinge
// (round 1 targets the box midpoint). Reads x_{<t} only.
Adversary chasing_adversary(const Box& box);

// Named generator descriptors addressable from experiment configs.
struct AdversaryConfig {
  enum class Kind { hinge, sinusoid, slowly_varying, killer, chaser };
  Kind kind = Kind::hinge;
  double lipschitz = 1.0;  // sinusoid
  double freq = 1.0;       // sinusoid
  int block = 10;          // slowly_varying
  double diameter = 0.0;   // killer; 0 means "use box sup-norm diameter"

  std::string name() const;
};

Adversary make_adversary(const AdversaryConfig& config, const Box& box, int T,
                         const RngStream& stream);

}  // namespace ftpl

#endif  // FTPL_ADVERSARY_HPP_
