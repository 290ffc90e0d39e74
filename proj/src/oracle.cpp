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

#include "ftpl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ftpl {

namespace {

bool lex_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                      b.data() + b.size());
}

}  // namespace

double OracleGuarantee::gamma(const Vector& sigma) const {
  if (!certified) {
    throw std::logic_error("OracleGuarantee::gamma: answer carries no certificate");
  }
  return alpha + beta * sigma.cwiseAbs().sum();
}

double OracleQuery::objective(const Vector& x) const {
  double v = 0.0;
  for (const auto& f : losses) v += f(x);
  if (guess) v += (*guess)(x);
  return v - sigma.dot(x);
}

double OracleQuery::lipschitz_sum() const {
  double s = 0.0;
  for (const auto& f : losses) s += f.lipschitz();
  if (guess) s += guess->lipschitz();
  return s;
}

// ---------------------------------------------------------------------------
// Pwl1dAccumulator
// ---------------------------------------------------------------------------

Pwl1dAccumulator::Pwl1dAccumulator(Box box) : box_(std::move(box)) {
  if (box_.dim() != 1) {
    throw std::invalid_argument("Pwl1dAccumulator: box must be 1-dimensional");
  }
}

void Pwl1dAccumulator::add(const LossFunction& f) {
  if (!f.piecewise_linear()) {
    throw std::invalid_argument("pwl1d: loss '" + f.descriptor() +
                                "' is not 1-d piecewise linear");
  }
  PwlProfile p;
  f.append_pwl_deltas(1.0, p);
  Vector xlo(1);
  xlo[0] = box_.lo()[0];
  anchor_ += f(xlo);
  base_slope_ += p.base_slope;
  lip_sum_ += f.lipschitz();
  // Sorted insert; upper_bound keeps later-added equal breakpoints after
  // existing ones, matching the stable sort in from_losses().
  for (const auto& d : p.deltas) {
    auto it = std::upper_bound(
        deltas_.begin(), deltas_.end(), d.first,
        [](double x, const std::pair<double, double>& e) { return x < e.first; });
    deltas_.insert(it, d);
  }
  losses_.push_back(f);
}

Pwl1dAccumulator Pwl1dAccumulator::from_losses(
    Box box, const std::vector<LossFunction>& losses) {
  Pwl1dAccumulator acc(std::move(box));
  Vector xlo(1);
  xlo[0] = acc.box_.lo()[0];
  PwlProfile p;
  for (const auto& f : losses) {
    if (!f.piecewise_linear()) {
      throw std::invalid_argument("pwl1d: loss '" + f.descriptor() +
                                  "' is not 1-d piecewise linear");
    }
    f.append_pwl_deltas(1.0, p);
    acc.anchor_ += f(xlo);
    acc.lip_sum_ += f.lipschitz();
    acc.losses_.push_back(f);
  }
  acc.base_slope_ = p.base_slope;
  std::stable_sort(p.deltas.begin(), p.deltas.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  acc.deltas_ = std::move(p.deltas);
  return acc;
}

OracleAnswer Pwl1dAccumulator::minimize(double sigma,
                                        const LossFunction* extra) const {
  const double lo = box_.lo()[0];
  const double hi = box_.hi()[0];

  PwlProfile ep;
  double extra_at_lo = 0.0;
  if (extra) {
    if (!extra->piecewise_linear()) {
      throw std::invalid_argument("pwl1d: guess '" + extra->descriptor() +
                                  "' is not 1-d piecewise linear");
    }
    extra->append_pwl_deltas(1.0, ep);
    std::stable_sort(ep.deltas.begin(), ep.deltas.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    Vector xlo(1);
    xlo[0] = lo;
    extra_at_lo = (*extra)(xlo);
  }

  double slope = base_slope_ + ep.base_slope - sigma;
  double value = anchor_ + extra_at_lo - sigma * lo;

  std::size_t i = 0;
  std::size_t j = 0;
  while (i < deltas_.size() && deltas_[i].first <= lo) slope += deltas_[i++].second;
  while (j < ep.deltas.size() && ep.deltas[j].first <= lo) slope += ep.deltas[j++].second;

  // Sweep left to right; keeping strict improvements only makes ties resolve
  // to the smallest coordinate.
  double best_x = lo;
  double best_v = value;
  double prev = lo;
  for (;;) {
    double b = std::numeric_limits<double>::infinity();
    if (i < deltas_.size()) b = deltas_[i].first;
    if (j < ep.deltas.size() && ep.deltas[j].first < b) b = ep.deltas[j].first;
    if (!(b < hi)) break;
    value += slope * (b - prev);
    if (value < best_v) {
      best_v = value;
      best_x = b;
    }
    prev = b;
    while (i < deltas_.size() && deltas_[i].first == b) slope += deltas_[i++].second;
    while (j < ep.deltas.size() && ep.deltas[j].first == b) slope += ep.deltas[j++].second;
  }
  value += slope * (hi - prev);
  if (value < best_v) {
    best_v = value;
    best_x = hi;
  }

  // Return the objective re-evaluated at the winner so the reported value is
  // free of sweep accumulation error.
  Vector xm(1);
  xm[0] = best_x;
  double exact_value = 0.0;
  for (const auto& f : losses_) exact_value += f(xm);
  if (extra) exact_value += (*extra)(xm);
  exact_value -= sigma * best_x;
  return OracleAnswer{xm, exact_value, OracleGuarantee::exact()};
}

OracleAnswer pwl1d_minimize(const OracleQuery& q) {
  if (q.box.dim() != 1 || q.sigma.size() != 1) {
    throw std::invalid_argument("pwl1d_minimize: query must be 1-dimensional");
  }
  const auto acc = Pwl1dAccumulator::from_losses(q.box, q.losses);
  return acc.minimize(q.sigma[0], q.guess ? &*q.guess : nullptr);
}

// ---------------------------------------------------------------------------
// Grid backend
// ---------------------------------------------------------------------------

namespace {

std::vector<std::int64_t> grid_axis_counts(const Box& box, double h,
                                           std::int64_t budget,
                                           std::int64_t* total_out) {
  if (!(h > 0)) throw std::invalid_argument("grid: spacing h must be positive");
  if (budget < 1) throw std::invalid_argument("grid: budget must be >= 1");
  const Eigen::Index d = box.dim();
  std::vector<std::int64_t> counts(static_cast<std::size_t>(d));
  std::int64_t total = 1;
  for (Eigen::Index a = 0; a < d; ++a) {
    const double edge = box.edge_length(a);
    const auto n = static_cast<std::int64_t>(std::ceil(edge / h - 1e-9));
    counts[static_cast<std::size_t>(a)] = std::max<std::int64_t>(1, n);
    const std::int64_t pts = counts[static_cast<std::size_t>(a)] + 1;
    if (pts > budget || total > budget / pts) {
      std::ostringstream os;
      os << "grid: budget of " << budget << " points exceeded; coarsen h (try h >= "
         << grid_feasible_spacing(box, budget) << ") or reduce the dimension";
      throw GridBudgetError(os.str(), grid_feasible_spacing(box, budget));
    }
    total *= pts;
  }
  if (total_out != nullptr) *total_out = total;
  return counts;
}

}  // namespace

std::int64_t grid_num_points(const Box& box, double h, std::int64_t budget) {
  std::int64_t total = 1;
  grid_axis_counts(box, h, budget, &total);
  return total;
}

GridAccumulator::GridAccumulator(Box box, double h, std::int64_t budget)
    : box_(std::move(box)), h_(h) {
  axis_counts_ = grid_axis_counts(box_, h, budget, &num_points_);
  cum_.assign(static_cast<std::size_t>(num_points_), 0.0);
}

Vector GridAccumulator::point(std::int64_t index) const {
  const Eigen::Index d = box_.dim();
  Vector p(d);
  std::int64_t rem = index;
  for (Eigen::Index a = d - 1; a >= 0; --a) {
    const std::int64_t n = axis_counts_[static_cast<std::size_t>(a)];
    const std::int64_t k = rem % (n + 1);
    rem /= n + 1;
    p[a] = (k == n) ? box_.hi()[a]
                    : box_.lo()[a] + box_.edge_length(a) *
                          (static_cast<double>(k) / static_cast<double>(n));
  }
  return p;
}

void GridAccumulator::add(const LossFunction& f) {
  for (std::int64_t idx = 0; idx < num_points_; ++idx) {
    cum_[static_cast<std::size_t>(idx)] += f(point(idx));
  }
  lip_sum_ += f.lipschitz();
  losses_.push_back(f);
}

OracleAnswer GridAccumulator::minimize(const Vector& sigma,
                                       const LossFunction* extra) const {
  if (sigma.size() != box_.dim()) {
    throw std::invalid_argument("grid: sigma dimension mismatch");
  }
  // Ascending index order is lexicographic order of the grid points, so
  // strict improvement implements the smallest-coordinate tie-break.
  std::int64_t best_idx = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (std::int64_t idx = 0; idx < num_points_; ++idx) {
    const Vector p = point(idx);
    double v = cum_[static_cast<std::size_t>(idx)] - sigma.dot(p);
    if (extra) v += (*extra)(p);
    if (v < best_v) {
      best_v = v;
      best_idx = idx;
    }
  }
  const Vector xm = point(best_idx);
  double exact_value = 0.0;
  for (const auto& f : losses_) exact_value += f(xm);
  if (extra) exact_value += (*extra)(xm);
  exact_value -= sigma.dot(xm);

  const double d = static_cast<double>(box_.dim());
  const double lip = lip_sum_ + (extra ? extra->lipschitz() : 0.0);
  OracleGuarantee g{lip * d * h_ / 2.0, d * h_ / 2.0, true};
  return OracleAnswer{xm, exact_value, g};
}

double grid_feasible_spacing(const Box& box, std::int64_t budget) {
  const auto d = static_cast<double>(box.dim());
  if (std::pow(2.0, d) > static_cast<double>(budget)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  auto fits = [&](double h) {
    double total = 1.0;
    for (Eigen::Index a = 0; a < box.dim(); ++a) {
      const double n = std::max(1.0, std::ceil(box.edge_length(a) / h - 1e-9));
      total *= n + 1.0;
      if (total > static_cast<double>(budget)) return false;
    }
    return true;
  };
  double hi = box.linf_diameter();
  double lo = hi * 1e-12;
  if (fits(lo)) return lo;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    (fits(mid) ? hi : lo) = mid;
  }
  return hi * (1.0 + 1e-9);
}

OracleAnswer grid_minimize(const OracleQuery& q, double h, std::int64_t budget) {
  GridAccumulator acc(q.box, h, budget);
  for (const auto& f : q.losses) acc.add(f);
  return acc.minimize(q.sigma, q.guess ? &*q.guess : nullptr);
}

// ---------------------------------------------------------------------------
// Local search backend
// ---------------------------------------------------------------------------

OracleAnswer local_search_minimize(const OracleQuery& q, int restarts, int steps,
                                   const RngStream& stream) {
  if (restarts < 1 || steps < 1) {
    throw std::invalid_argument("local_search: restarts and steps must be >= 1");
  }
  const Eigen::Index d = q.box.dim();
  const double h0 = q.box.edge_lengths().maxCoeff() / 4.0;

  Vector best;
  double best_v = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    StreamCursor cursor(stream.fork(static_cast<std::uint64_t>(r)));
    Vector cur(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      cur[i] = cursor.next_uniform(q.box.lo()[i], q.box.hi()[i]);
    }
    double f_cur = q.objective(cur);
    double h = h0;
    for (int s = 0; s < steps; ++s) {
      bool improved = false;
      for (Eigen::Index i = 0; i < d; ++i) {
        for (double dir : {1.0, -1.0}) {
          const double xi = std::clamp(cur[i] + dir * h, q.box.lo()[i], q.box.hi()[i]);
          if (xi == cur[i]) continue;
          Vector cand = cur;
          cand[i] = xi;
          const double f_cand = q.objective(cand);
          if (f_cand < f_cur) {
            cur = std::move(cand);
            f_cur = f_cand;
            improved = true;
          }
        }
      }
      if (!improved) {
        h *= 0.5;
        if (h < 1e-13 * h0) break;
      }
    }
    if (f_cur < best_v || (f_cur == best_v && lex_less(cur, best))) {
      best_v = f_cur;
      best = cur;
    }
  }
  return OracleAnswer{best, best_v, OracleGuarantee::none()};
}

bool contract_check(const OracleAnswer& answer, const OracleQuery& q,
                    double reference_min) {
  if (!answer.guarantee.certified) {
    throw std::invalid_argument(
        "contract_check: answer carries no certificate; the (alpha,beta) "
        "contract does not apply");
  }
  return answer.value <= reference_min + answer.guarantee.gamma(q.sigma) + 1e-9;
}

// ---------------------------------------------------------------------------
// Backend dispatch
// ---------------------------------------------------------------------------

std::string OracleConfig::name() const {
  switch (kind) {
    case Kind::pwl1d:
      return "pwl1d";
    case Kind::grid: {
      std::ostringstream os;
      os << "grid(h=" << h << ")";
      return os.str();
    }
    case Kind::local_search: {
      std::ostringstream os;
      os << "local-search(restarts=" << restarts << ",steps=" << steps << ")";
      return os.str();
    }
  }
  return "?";
}

OracleAnswer oracle_minimize(const OracleConfig& config, const OracleQuery& q,
                             const RngStream& stream) {
  switch (config.kind) {
    case OracleConfig::Kind::pwl1d:
      return pwl1d_minimize(q);
    case OracleConfig::Kind::grid:
      return grid_minimize(q, config.h, config.budget);
    case OracleConfig::Kind::local_search:
      return local_search_minimize(q, config.restarts, config.steps, stream);
  }
  throw std::logic_error("oracle_minimize: unknown backend");
}

OracleAnswer reference_minimum(const std::vector<LossFunction>& losses,
                               const Box& box, const OracleConfig& config) {
  OracleQuery q{losses, std::nullopt, Vector::Zero(box.dim()), box};
  // Fixed stream: the heuristic reference stays deterministic without a
  // caller-provided source.
  return oracle_minimize(config, q, RngStream(0x5eedu));
}

}  // namespace ftpl
