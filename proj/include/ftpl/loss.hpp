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

#ifndef FTPL_LOSS_HPP_
#define FTPL_LOSS_HPP_

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ftpl/box.hpp"

namespace ftpl {

// Slope-change description of a 1-d piecewise-linear function:
//   f'(x) = base_slope + sum of dslope over deltas with breakpoint <= x,
// together with f evaluated anywhere once to anchor the value. Sums of
// piecewise-linear functions concatenate their deltas.
struct PwlProfile {
  double base_slope = 0.0;
  std::vector<std::pair<double, double>> deltas;  // (breakpoint, dslope), sorted
};

class LossImpl;

// Immutable loss function f: R^d -> R with a declared l1-Lipschitz constant
// and a structural descriptor. Cheap to copy (shared immutable state).
class LossFunction {
 public:
  LossFunction();  // the zero function

  double operator()(const Vector& x) const;
  double lipschitz() const;

  // Structural tag: "zero", "hinge", "linear", "sinusoid", "pwl", "sum",
  // "opaque". A short parameter summary for traces and CSV descriptors.
  std::string descriptor() const;

  // True when the function is 1-d piecewise linear, i.e. the exact
  // breakpoint-enumeration oracle applies.
  bool piecewise_linear() const;

  // Slope-change profile scaled by `weight`, appended to `out`. Only valid
  // when piecewise_linear(). Breakpoints may lie outside any particular box.
  void append_pwl_deltas(double weight, PwlProfile& out) const;

  // --- constructors -------------------------------------------------------

  static LossFunction zero();

  // g_a(x) = max{0, diameter/2 - ||x - a||_1}; 1-Lipschitz w.r.t. l1, peak
  // diameter/2 at the center.
  static LossFunction hinge(Vector center, double diameter);

  // <coeffs, x> + offset.
  static LossFunction linear(Vector coeffs, double offset = 0.0);

  // (lipschitz/freq) * sum_i sin(freq * x_i + phase_i); per-coordinate slope
  // is bounded by `lipschitz`, so the declared l1 constant is exact.
  static LossFunction sinusoid(double lipschitz, double freq, Vector phases);

  // 1-d piecewise-linear interpolation of (xs, ys) with linear extrapolation
  // beyond the first/last knot. xs strictly increasing, size >= 2.
  static LossFunction pwl(std::vector<double> xs, std::vector<double> ys);

  // weight * f for each (weight, f); Lipschitz constant sum_i |w_i| L_i.
  static LossFunction scaled_sum(std::vector<std::pair<double, LossFunction>> terms);

  // Arbitrary callable with a declared Lipschitz constant. Not eligible for
  // the exact piecewise-linear oracle.
  static LossFunction opaque(std::function<double(const Vector&)> eval,
                             double lipschitz, std::string descriptor = "opaque");

  // Same function, different declared constant (must still be valid).
  static LossFunction with_lipschitz(LossFunction f, double lipschitz);

 private:
  explicit LossFunction(std::shared_ptr<const LossImpl> impl);
  std::shared_ptr<const LossImpl> impl_;
};

struct LipschitzAudit {
  double max_ratio = 0.0;
  bool pass = true;
};

// Statistical check of |f(x)-f(y)| <= L ||x-y||_1 over n_pairs uniform pairs
// in the box (coincident pairs skipped). pass iff max_ratio <= L*(1+1e-9).
LipschitzAudit lipschitz_audit(const LossFunction& f, const Box& box,
                               int n_pairs, const RngStream& stream);

}  // namespace ftpl

#endif  // FTPL_LOSS_HPP_
