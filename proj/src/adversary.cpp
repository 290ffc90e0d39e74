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

#include "ftpl/adversary.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ftpl {

std::vector<LossFunction> oblivious_hinge_sequence(const Box& box, int T,
                                                   const RngStream& stream) {
  if (T < 1) throw std::invalid_argument("oblivious_hinge_sequence: T >= 1");
  const double diameter = box.linf_diameter();
  std::vector<LossFunction> seq;
  seq.reserve(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    const Vector center = box.sample(stream.fork(static_cast<std::uint64_t>(t)));
    seq.push_back(LossFunction::hinge(center, diameter));
  }
  return seq;
}

std::vector<LossFunction> oblivious_sinusoid_sequence(const Box& box, int T,
                                                      double L, double freq,
                                                      const RngStream& stream) {
  if (T < 1) throw std::invalid_argument("oblivious_sinusoid_sequence: T >= 1");
  if (!(L > 0) || !(freq > 0)) {
    throw std::invalid_argument("oblivious_sinusoid_sequence: L > 0 and freq > 0");
  }
  const double two_pi = 2.0 * M_PI;
  std::vector<LossFunction> seq;
  seq.reserve(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    const RngStream s = stream.fork(static_cast<std::uint64_t>(t));
    Vector phases(box.dim());
    for (Eigen::Index i = 0; i < box.dim(); ++i) {
      phases[i] = s.uniform(static_cast<std::uint64_t>(i), 0.0, two_pi);
    }
    seq.push_back(LossFunction::sinusoid(L, freq, std::move(phases)));
  }
  return seq;
}

std::vector<LossFunction> slowly_varying_sequence(const Box& box, int T, int block,
                                                  const RngStream& stream) {
  if (T < 1) throw std::invalid_argument("slowly_varying_sequence: T >= 1");
  if (block < 1) throw std::invalid_argument("slowly_varying_sequence: block >= 1");
  const double diameter = box.linf_diameter();
  std::vector<LossFunction> seq;
  seq.reserve(static_cast<std::size_t>(T));
  LossFunction current = LossFunction::zero();
  for (int t = 1; t <= T; ++t) {
    if ((t - 1) % block == 0) {
      const auto k = static_cast<std::uint64_t>((t - 1) / block);
      current = LossFunction::hinge(box.sample(stream.fork(k)), diameter);
    }
    seq.push_back(current);
  }
  return seq;
}

LossFunction killer_next_loss(const Point& x_t, double diameter) {
  return LossFunction::hinge(x_t, diameter);
}

Adversary Adversary::oblivious(std::vector<LossFunction> sequence,
                               std::string descriptor) {
  Adversary a;
  a.mode_ = Mode::oblivious;
  a.sequence_ = std::move(sequence);
  a.descriptor_ = std::move(descriptor);
  return a;
}

Adversary Adversary::adaptive(
    std::function<LossFunction(int, const std::vector<Point>&)> next,
    std::string descriptor) {
  Adversary a;
  a.mode_ = Mode::adaptive;
  a.next_fn_ = std::move(next);
  a.descriptor_ = std::move(descriptor);
  return a;
}

Adversary Adversary::killer(double diameter) {
  if (!(diameter > 0)) throw std::invalid_argument("killer: diameter must be positive");
  Adversary a;
  a.mode_ = Mode::killer;
  a.killer_diameter_ = diameter;
  std::ostringstream os;
  os << "killer(D=" << diameter << ")";
  a.descriptor_ = os.str();
  return a;
}

LossFunction Adversary::next(int t, const std::vector<Point>& past,
                             const Point* current) const {
  switch (mode_) {
    case Mode::oblivious:
      if (t < 1 || static_cast<std::size_t>(t) > sequence_.size()) {
        throw std::out_of_range("adversary: round beyond the fixed sequence");
      }
      return sequence_[static_cast<std::size_t>(t - 1)];
    case Mode::adaptive:
      return next_fn_(t, past);
    case Mode::killer:
      if (current == nullptr) {
        throw std::invalid_argument("killer adversary needs the current prediction");
      }
      return killer_next_loss(*current, killer_diameter_);
  }
  throw std::logic_error("adversary: unknown mode");
}

Adversary chasing_adversary(const Box& box) {
  const double diameter = box.linf_diameter();
  const Vector mid = 0.5 * (box.lo() + box.hi());
  return Adversary::adaptive(
      [diameter, mid](int /*t*/, const std::vector<Point>& past) {
        const Point target = past.empty() ? mid : past.back();
        return LossFunction::hinge(target, diameter);
      },
      "chaser");
}

std::string AdversaryConfig::name() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::hinge:
      return "hinge";
    case Kind::sinusoid:
      os << "sinusoid(L=" << lipschitz << ",freq=" << freq << ")";
      return os.str();
    case Kind::slowly_varying:
      os << "slowly-varying(block=" << block << ")";
      return os.str();
    case Kind::killer:
      os << "killer(D=" << diameter << ")";
      return os.str();
    case Kind::chaser:
      return "chaser";
  }
  return "?";
}

Adversary make_adversary(const AdversaryConfig& config, const Box& box, int T,
                         const RngStream& stream) {
  switch (config.kind) {
    case AdversaryConfig::Kind::hinge:
      return Adversary::oblivious(oblivious_hinge_sequence(box, T, stream), "hinge");
    case AdversaryConfig::Kind::sinusoid:
      return Adversary::oblivious(
          oblivious_sinusoid_sequence(box, T, config.lipschitz, config.freq, stream),
          config.name());
    case AdversaryConfig::Kind::slowly_varying:
      return Adversary::oblivious(
          slowly_varying_sequence(box, T, config.block, stream), config.name());
    case AdversaryConfig::Kind::killer:
      return Adversary::killer(config.diameter > 0 ? config.diameter
                                                   : box.linf_diameter());
    case AdversaryConfig::Kind::chaser:
      return chasing_adversary(box);
  }
  throw std::logic_error("make_adversary: unknown kind");
}

}  // namespace ftpl
