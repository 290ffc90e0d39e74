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

#ifndef FTPL_ORACLE_HPP_
#define FTPL_ORACLE_HPP_

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftpl/box.hpp"
#include "ftpl/loss.hpp"
#include "ftpl/random.hpp"

namespace ftpl {

// Additive error certificate of an offline minimizer: the returned point is
// within alpha + beta * ||sigma||_1 of the optimum of f(x) - <sigma, x>.
// Heuristic backends return an uncertified sentinel instead of fake numbers.
struct OracleGuarantee {
  double alpha = 0.0;
  double beta = 0.0;
  bool certified = true;

  static OracleGuarantee exact() { return {0.0, 0.0, true}; }
  static OracleGuarantee none() {
    return {std::numeric_limits<double>::quiet_NaN(),
            std::numeric_limits<double>::quiet_NaN(), false};
  }

  double gamma(const Vector& sigma) const;
};

// Minimize sum(losses) + guess - <sigma, x> over the box.
struct OracleQuery {
  std::vector<LossFunction> losses;
  std::optional<LossFunction> guess;
  Vector sigma;
  Box box;

  double objective(const Vector& x) const;
  // Lipschitz constant of the non-linear part: sum of declared constants of
  // the losses plus the guess.
  double lipschitz_sum() const;
};

struct OracleAnswer {
  Point minimizer;
  double value = 0.0;
  OracleGuarantee guarantee;
};

inline constexpr std::int64_t kDefaultGridBudget = 4'000'000;

class GridBudgetError : public std::runtime_error {
 public:
  GridBudgetError(std::string msg, double suggested_h)
      : std::runtime_error(std::move(msg)), suggested_h(suggested_h) {}
  double suggested_h;
};

// Exhaustive search over an axis-aligned grid with per-axis spacing <= h,
// both box corners included on every axis. Certificate: the nearest grid
// point is within d*h/2 in l1, so alpha = L_obj * d*h/2 and beta = d*h/2.
// Throws GridBudgetError when the grid would exceed `budget` points.
OracleAnswer grid_minimize(const OracleQuery& q, double h,
                           std::int64_t budget = kDefaultGridBudget);

// Exact minimizer for d = 1 queries whose losses (and guess) are all
// piecewise linear: evaluates every breakpoint plus the box endpoints.
// Guarantee (0, 0). Ties break to the smallest coordinate.
OracleAnswer pwl1d_minimize(const OracleQuery& q);

// Random-restart coordinate descent with shrinking step; deterministic given
// the stream. No certificate (guarantee is the uncertified sentinel).
OracleAnswer local_search_minimize(const OracleQuery& q, int restarts,
                                   int steps, const RngStream& stream);

// True iff answer.value <= reference_min + alpha + beta*||sigma||_1 + 1e-9.
// `reference_min` must be a certified lower bound or the exact minimum.
// Throws if the answer carries no certificate.
bool contract_check(const OracleAnswer& answer, const OracleQuery& q,
                    double reference_min);

// ---------------------------------------------------------------------------
// Incremental caches. A game loop adds one loss per round and re-minimizes;
// both caches reproduce the stateless backends bit for bit (same summation
// order, same tie-breaks), at amortized cost far below re-enumeration.
// ---------------------------------------------------------------------------

// Running sum of 1-d piecewise-linear losses held as a sorted slope-change
// list plus a value anchor at the box's lower end.
class Pwl1dAccumulator {
 public:
  explicit Pwl1dAccumulator(Box box);

  void add(const LossFunction& f);
  // Batch variant used by the stateless backend: single stable sort instead
  // of per-loss sorted inserts. Equal-breakpoint order matches add().
  static Pwl1dAccumulator from_losses(Box box, const std::vector<LossFunction>& losses);

  // argmin of accumulated(x) + extra(x) - sigma*x over the box.
  OracleAnswer minimize(double sigma, const LossFunction* extra = nullptr) const;

  int count() const { return static_cast<int>(losses_.size()); }
  double lipschitz_sum() const { return lip_sum_; }
  const Box& box() const { return box_; }

 private:
  Box box_;
  std::vector<LossFunction> losses_;
  double anchor_ = 0.0;      // accumulated value at box.lo()
  double base_slope_ = 0.0;  // accumulated slope at -inf
  double lip_sum_ = 0.0;
  std::vector<std::pair<double, double>> deltas_;  // sorted by breakpoint
};

// Running per-point sums of arbitrary losses over a fixed grid.
class GridAccumulator {
 public:
  GridAccumulator(Box box, double h, std::int64_t budget = kDefaultGridBudget);

  void add(const LossFunction& f);
  OracleAnswer minimize(const Vector& sigma, const LossFunction* extra = nullptr) const;

  std::int64_t num_points() const { return num_points_; }
  double spacing() const { return h_; }
  double lipschitz_sum() const { return lip_sum_; }
  const Box& box() const { return box_; }
  Vector point(std::int64_t index) const;

 private:
  Box box_;
  double h_;
  std::vector<std::int64_t> axis_counts_;  // segments per axis
  std::int64_t num_points_ = 1;
  std::vector<LossFunction> losses_;
  double lip_sum_ = 0.0;
  std::vector<double> cum_;
};

// Largest spacing h whose grid fits the budget for this box (coarsening aid
// for error messages and config validation).
double grid_feasible_spacing(const Box& box, std::int64_t budget);

// Number of grid points for this box and spacing, without building the grid;
// throws GridBudgetError past the budget.
std::int64_t grid_num_points(const Box& box, double h, std::int64_t budget);

// ---------------------------------------------------------------------------
// Backend selection used by learner configs and the CLI.
// ---------------------------------------------------------------------------

struct OracleConfig {
  enum class Kind { pwl1d, grid, local_search };
  Kind kind = Kind::pwl1d;
  double h = 0.01;                             // grid
  std::int64_t budget = kDefaultGridBudget;    // grid
  int restarts = 16;                           // local search
  int steps = 200;                             // local search

  bool exact() const { return kind == Kind::pwl1d; }
  std::string name() const;
};

// Dispatch to the configured backend; `stream` feeds local search only.
OracleAnswer oracle_minimize(const OracleConfig& config, const OracleQuery& q,
                             const RngStream& stream);

// Certified (or heuristic, for local search) minimum of sum(losses) over the
// box: answer.value minus answer.guarantee.alpha is a valid lower bound for
// certified backends.
OracleAnswer reference_minimum(const std::vector<LossFunction>& losses,
                               const Box& box, const OracleConfig& config);

}  // namespace ftpl

#endif  // FTPL_ORACLE_HPP_
