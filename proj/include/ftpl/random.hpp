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

#ifndef FTPL_RANDOM_HPP_
#define FTPL_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

namespace ftpl {

namespace detail {

// splitmix64 output function (Steele, Lea & Flood 2014).
constexpr std::uint64_t Sm64Finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

// Counter-based uniform random stream. A stream is identified by a 64-bit
// key; position `pos` of a stream is a pure function of (key, pos), so
// identical keys and positions always produce identical draws, on any
// platform and regardless of evaluation order. Streams are split with
// fork(tag), which derives a statistically independent child stream.
//
// The generator behind word() is splitmix64 with the stream key folded into
// the starting state; consecutive positions walk the golden-gamma counter.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key)
      : state_(detail::Sm64Finalize(key + detail::kGolden)) {}

  std::uint64_t key() const { return state_; }

  RngStream fork(std::uint64_t tag) const {
    return RngStream(detail::Sm64Finalize(state_ ^ (tag + 1) * detail::kGolden));
  }

  std::uint64_t word(std::uint64_t pos) const {
    return detail::Sm64Finalize(state_ + (pos + 1) * detail::kGolden);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint64_t pos) const {
    return static_cast<double>(word(pos) >> 11) * 0x1.0p-53;
  }

  double uniform(std::uint64_t pos, double lo, double hi) const {
    return lo + (hi - lo) * uniform(pos);
  }

 private:
  std::uint64_t state_;
};

// Sequential cursor over a stream, for call sites that draw a variable
// number of values (local search, generators).
class StreamCursor {
 public:
  explicit StreamCursor(RngStream stream) : stream_(stream) {}

  double next_uniform() { return stream_.uniform(pos_++); }
  double next_uniform(double lo, double hi) { return stream_.uniform(pos_++, lo, hi); }

 private:
  RngStream stream_;
  std::uint64_t pos_ = 0;
};

// Nonnegative coordinate-wise exponential perturbation: P(sigma_i >= s) =
// exp(-eta * s), so E[sigma_i] = 1 / eta.
struct ExpPerturbation {
  double eta;
  std::uint64_t stream_key;
  Eigen::VectorXd sigma;
};

// Draws d i.i.d. Exp(eta) coordinates by inverse CDF: sigma_i = -ln(1-U_i)/eta
// with U_i = stream.uniform(i). Deterministic given (eta, d, stream).
inline ExpPerturbation sample_perturbation(double eta, Eigen::Index d,
                                           const RngStream& stream) {
  if (!(eta > 0) || !std::isfinite(eta)) {
    throw std::invalid_argument("sample_perturbation: eta must be positive and finite");
  }
  if (d < 1) {
    throw std::invalid_argument("sample_perturbation: dimension must be >= 1");
  }
  Eigen::VectorXd sigma(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    // -log1p(-u) = -ln(1-u), stable near u = 0; u < 1 keeps the draw finite.
    sigma[i] = -std::log1p(-stream.uniform(static_cast<std::uint64_t>(i))) / eta;
  }
  return ExpPerturbation{eta, stream.key(), std::move(sigma)};
}

}  // namespace ftpl

#endif  // FTPL_RANDOM_HPP_
