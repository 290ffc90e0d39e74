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

#ifndef FTPL_BOX_HPP_
#define FTPL_BOX_HPP_

#include <Eigen/Core>

#include "ftpl/random.hpp"

namespace ftpl {

using Vector = Eigen::VectorXd;

// Points are plain dense vectors; a Box decides whether one is feasible.
using Point = Eigen::VectorXd;

// Axis-aligned hyper-rectangle [lo_1,hi_1] x ... x [lo_d,hi_d] with strictly
// positive, finite edge lengths.
class Box {
 public:
  Box(Vector lo, Vector hi);

  Eigen::Index dim() const { return lo_.size(); }
  const Vector& lo() const { return lo_; }
  const Vector& hi() const { return hi_; }

  Vector edge_lengths() const { return hi_ - lo_; }
  double edge_length(Eigen::Index i) const { return hi_[i] - lo_[i]; }

  // sup-norm diameter; for a box this is the longest edge.
  double linf_diameter() const { return (hi_ - lo_).maxCoeff(); }

  bool contains(const Vector& x, double tol = 0.0) const;
  Vector clamp(const Vector& x) const;

  // Uniform point; consumes positions [pos0, pos0 + d) of the stream.
  Vector sample(const RngStream& stream, std::uint64_t pos0 = 0) const;

 private:
  Vector lo_;
  Vector hi_;
};

// sum_i |a_i - b_i|; throws on dimension mismatch.
double l1_distance(const Vector& a, const Vector& b);

// (sum_i D_i) / (max_i D_i), in [1, d].
double effective_dimension(const Box& box);

}  // namespace ftpl

#endif  // FTPL_BOX_HPP_
