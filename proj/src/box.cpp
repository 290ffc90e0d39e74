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

#include "ftpl/box.hpp"

#include <cmath>
#include <stdexcept>

namespace ftpl {

Box::Box(Vector lo, Vector hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size()) {
    throw std::invalid_argument("Box: lo and hi must have the same dimension");
  }
  if (lo_.size() < 1) {
    throw std::invalid_argument("Box: dimension must be >= 1");
  }
  for (Eigen::Index i = 0; i < lo_.size(); ++i) {
    if (!std::isfinite(lo_[i]) || !std::isfinite(hi_[i])) {
      throw std::invalid_argument("Box: all bounds must be finite");
    }
    if (!(lo_[i] < hi_[i])) {
      // Degenerate edges are rejected outright so every edge length is
      // strictly positive and the effective dimension stays well defined.
      throw std::invalid_argument("Box: lo_i < hi_i required for every edge");
    }
  }
}

bool Box::contains(const Vector& x, double tol) const {
  if (x.size() != dim()) return false;
  return (x.array() >= lo_.array() - tol).all() &&
         (x.array() <= hi_.array() + tol).all();
}

Vector Box::clamp(const Vector& x) const {
  return x.cwiseMax(lo_).cwiseMin(hi_);
}

Vector Box::sample(const RngStream& stream, std::uint64_t pos0) const {
  Vector x(dim());
  for (Eigen::Index i = 0; i < dim(); ++i) {
    x[i] = stream.uniform(pos0 + static_cast<std::uint64_t>(i), lo_[i], hi_[i]);
  }
  return x;
}

double l1_distance(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("l1_distance: dimension mismatch");
  }
  return (a - b).cwiseAbs().sum();
}

double effective_dimension(const Box& box) {
  const Vector edges = box.edge_lengths();
  return edges.sum() / edges.maxCoeff();
}

}  // namespace ftpl
