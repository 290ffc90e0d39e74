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

#include "ftpl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ftpl {

namespace {

bool deterministic_learner(const LearnerConfig& c) {
  return c.variant == Variant::ftl || std::isinf(c.eta);
}

OracleAnswer certified_minimize(const OracleConfig& oracle, const OracleQuery& q,
                                const char* who) {
  const OracleAnswer a = oracle_minimize(oracle, q, RngStream(0));
  if (!a.guarantee.certified) {
    throw std::invalid_argument(std::string(who) +
                                ": requires a certified oracle backend");
  }
  return a;
}

// Inclusive uniform grid with `per_axis` points per axis, enumerated in
// lexicographic order.
std::vector<Point> comparator_grid(const Box& box, int per_axis) {
  if (per_axis < 2) throw std::invalid_argument("comparator grid: >= 2 points per axis");
  const Eigen::Index d = box.dim();
  std::int64_t total = 1;
  for (Eigen::Index a = 0; a < d; ++a) total *= per_axis;
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(total));
  for (std::int64_t idx = 0; idx < total; ++idx) {
    Point p(d);
    std::int64_t rem = idx;
    for (Eigen::Index a = d - 1; a >= 0; --a) {
      const std::int64_t j = rem % per_axis;
      rem /= per_axis;
      p[a] = (j == per_axis - 1)
                 ? box.hi()[a]
                 : box.lo()[a] + box.edge_length(a) *
                       (static_cast<double>(j) / static_cast<double>(per_axis - 1));
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

}  // namespace

double GameTrace::cumulative_loss() const {
  double s = 0.0;
  for (const auto& r : rounds) s += r.loss_value;
  return s;
}

double GameTrace::stability_mean() const {
  if (rounds.size() < 2) return 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < rounds.size(); ++k) {
    s += l1_distance(rounds[k].x, rounds[k + 1].x);
  }
  return s / static_cast<double>(rounds.size() - 1);
}

GameTrace play(const LearnerConfig& learner_config, const Adversary& adversary,
               const Box& box, int T, std::uint64_t seed,
               bool per_round_diagnostics) {
  if (T < 1) throw std::invalid_argument("play: T must be >= 1");
  learner_config.validate();
  if (adversary.mode() == Adversary::Mode::killer &&
      !deterministic_learner(learner_config)) {
    throw std::invalid_argument(
        "play: the killer adversary reads the current prediction, which is "
        "only legal against a deterministic learner (ftl or eta = inf)");
  }

  Learner learner(learner_config, box, RngStream(seed).fork(kGameLearnerTag));

  GameTrace trace{learner_config, adversary.descriptor(), box, T, seed, {}, {}, {}};
  trace.losses.reserve(static_cast<std::size_t>(T));
  trace.rounds.reserve(static_cast<std::size_t>(T));
  if (deterministic_learner(learner_config)) {
    trace.frozen_sigma = Vector::Zero(box.dim());
  } else if (learner_config.perturbation == PerturbationMode::frozen) {
    trace.frozen_sigma = learner.state().frozen_sigma;
  }

  std::vector<Point> past;
  past.reserve(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    try {
      const Prediction pred = learner.predict();
      const Point* current =
          adversary.mode() == Adversary::Mode::killer ? &pred.x : nullptr;
      const LossFunction f = adversary.next(t, past, current);
      const double fval = f(pred.x);
      learner.observe(f);
      const double prefix_best =
          per_round_diagnostics ? learner.prefix_best().value
                                : std::numeric_limits<double>::quiet_NaN();
      trace.rounds.push_back(RoundRecord{t, pred.sigma, pred.x, f.descriptor(), fval,
                                         pred.guarantee.alpha, pred.guarantee.beta,
                                         prefix_best});
      trace.losses.push_back(f);
      past.push_back(trace.rounds.back().x);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "play: round " << t << ": " << e.what();
      throw std::runtime_error(os.str());
    }
  }
  return trace;
}

RegretReport regret(const GameTrace& trace, const OracleConfig& reference) {
  RegretReport report;
  report.learner_cum_loss = trace.cumulative_loss();
  report.stability_mean = trace.stability_mean();

  const OracleAnswer ref = reference_minimum(trace.losses, trace.box, reference);
  report.best_point = ref.minimizer;
  if (ref.guarantee.certified) {
    // Shift the achieved value down by alpha so the reported best is a valid
    // lower bound and the regret is never understated.
    report.best_alpha = ref.guarantee.alpha;
    report.best_value = ref.value - ref.guarantee.alpha;
  } else {
    report.best_alpha = std::numeric_limits<double>::quiet_NaN();
    report.best_value = ref.value;
  }
  report.avg_regret = (report.learner_cum_loss - report.best_value) /
                      static_cast<double>(trace.T);

  double gamma_worst = 0.0;
  for (const auto& r : trace.rounds) {
    const double g = r.alpha + r.beta * r.sigma.cwiseAbs().sum();
    if (std::isnan(g)) {
      gamma_worst = g;
      break;
    }
    gamma_worst = std::max(gamma_worst, g);
  }
  report.gamma_worst = gamma_worst;
  return report;
}

// ---------------------------------------------------------------------------
// Probes
// ---------------------------------------------------------------------------

ProbeResult probe_monotone1(const std::vector<LossFunction>& history, const Box& box,
                            int coord, double c, const Vector& sigma,
                            const OracleConfig& oracle) {
  if (!(c > 0)) throw std::invalid_argument("probe_monotone1: c must be positive");
  if (coord < 0 || coord >= box.dim()) {
    throw std::invalid_argument("probe_monotone1: coordinate out of range");
  }
  Vector sigma_shift = sigma;
  sigma_shift[coord] += c;

  const OracleAnswer at_sigma =
      certified_minimize(oracle, {history, std::nullopt, sigma, box}, "probe_monotone1");
  const OracleAnswer at_shift = certified_minimize(
      oracle, {history, std::nullopt, sigma_shift, box}, "probe_monotone1");

  const double alpha = std::max(at_sigma.guarantee.alpha, at_shift.guarantee.alpha);
  const double beta = std::max(at_sigma.guarantee.beta, at_shift.guarantee.beta);
  const double gamma = alpha + beta * sigma.cwiseAbs().sum();

  const double lhs = at_shift.minimizer[coord];
  const double rhs = at_sigma.minimizer[coord] - 2.0 * gamma / c - beta;
  ProbeResult r;
  r.slack = lhs - rhs;
  r.pass = r.slack >= -kProbeTol;
  return r;
}

ProbeResult probe_monotone2(const std::vector<LossFunction>& history_then_next,
                            const Box& box, int coord, double lipschitz,
                            const Vector& sigma, const OracleConfig& oracle) {
  if (history_then_next.empty()) {
    throw std::invalid_argument("probe_monotone2: need at least the round-t loss");
  }
  if (!(lipschitz > 0)) {
    throw std::invalid_argument("probe_monotone2: lipschitz must be positive");
  }
  const std::vector<LossFunction> prefix(history_then_next.begin(),
                                         history_then_next.end() - 1);
  const auto d = static_cast<double>(box.dim());
  const double shift = 100.0 * lipschitz * d;
  Vector sigma_shift = sigma;
  sigma_shift[coord] += shift;

  const OracleAnswer xt_s =
      certified_minimize(oracle, {prefix, std::nullopt, sigma, box}, "probe_monotone2");
  const OracleAnswer xt1_s = certified_minimize(
      oracle, {history_then_next, std::nullopt, sigma, box}, "probe_monotone2");

  const double diff_i = std::abs(xt_s.minimizer[coord] - xt1_s.minimizer[coord]);
  ProbeResult r;
  if (l1_distance(xt_s.minimizer, xt1_s.minimizer) > 10.0 * d * diff_i + kProbeTol) {
    r.applicable = false;
    return r;
  }

  const OracleAnswer xt_sp = certified_minimize(
      oracle, {prefix, std::nullopt, sigma_shift, box}, "probe_monotone2");
  const OracleAnswer xt1_sp = certified_minimize(
      oracle, {history_then_next, std::nullopt, sigma_shift, box}, "probe_monotone2");

  double alpha = std::max({xt_s.guarantee.alpha, xt1_s.guarantee.alpha,
                           xt_sp.guarantee.alpha, xt1_sp.guarantee.alpha});
  double beta = std::max({xt_s.guarantee.beta, xt1_s.guarantee.beta,
                          xt_sp.guarantee.beta, xt1_sp.guarantee.beta});
  const double gamma = alpha + beta * sigma.cwiseAbs().sum();

  const double lhs = std::min(xt_sp.minimizer[coord], xt1_sp.minimizer[coord]);
  const double rhs = std::max(xt_s.minimizer[coord], xt1_s.minimizer[coord]) -
                     diff_i / 10.0 - 3.0 * gamma / shift - beta;
  r.slack = lhs - rhs;
  r.pass = r.slack >= -kProbeTol;
  return r;
}

ProbeResult probe_monotone_oftpl(const std::vector<LossFunction>& history_then_next,
                                 const Box& box, int coord, GuessStrategy guess,
                                 double l_t, const Vector& sigma,
                                 const OracleConfig& oracle,
                                 const OracleConfig& exact_oracle) {
  if (history_then_next.empty()) {
    throw std::invalid_argument("probe_monotone_oftpl: need at least the round-t loss");
  }
  if (!(l_t > 0)) {
    throw std::invalid_argument("probe_monotone_oftpl: l_t must be positive");
  }
  if (!exact_oracle.exact()) {
    throw std::invalid_argument(
        "probe_monotone_oftpl: the one-step leader needs an exact oracle");
  }
  const std::vector<LossFunction> prefix(history_then_next.begin(),
                                         history_then_next.end() - 1);
  const LossFunction g_t = make_guess(guess, prefix);
  const auto d = static_cast<double>(box.dim());
  const double shift = 100.0 * l_t * d;
  Vector sigma_shift = sigma;
  sigma_shift[coord] += shift;

  const OracleAnswer xt_s = certified_minimize(oracle, {prefix, g_t, sigma, box},
                                               "probe_monotone_oftpl");
  const OracleAnswer leader_s =
      pwl1d_minimize({history_then_next, std::nullopt, sigma, box});

  const double diff_i = std::abs(xt_s.minimizer[coord] - leader_s.minimizer[coord]);
  ProbeResult r;
  if (l1_distance(xt_s.minimizer, leader_s.minimizer) > 10.0 * d * diff_i + kProbeTol) {
    r.applicable = false;
    return r;
  }

  const OracleAnswer xt_sp = certified_minimize(oracle, {prefix, g_t, sigma_shift, box},
                                                "probe_monotone_oftpl");
  const OracleAnswer leader_sp =
      pwl1d_minimize({history_then_next, std::nullopt, sigma_shift, box});

  const double alpha = std::max(xt_s.guarantee.alpha, xt_sp.guarantee.alpha);
  const double beta = std::max(xt_s.guarantee.beta, xt_sp.guarantee.beta);
  const double gamma = alpha + beta * sigma.cwiseAbs().sum();

  const double margin = diff_i / 10.0 + gamma / shift;
  const double s1 = leader_sp.minimizer[coord] - (xt_s.minimizer[coord] - margin);
  const double s2 = xt_sp.minimizer[coord] - (leader_s.minimizer[coord] - margin);
  const double s3 = leader_sp.minimizer[coord] - leader_s.minimizer[coord];
  r.slack = std::min({s1, s2, s3});
  r.pass = r.slack >= -kProbeTol;
  return r;
}

BtlReport probe_btl(const GameTrace& trace, int grid_points_per_axis,
                    const OracleConfig& exact_oracle) {
  if (!trace.frozen_sigma) {
    throw std::invalid_argument("probe_btl: requires a frozen-sigma trace");
  }
  const Vector& sigma = *trace.frozen_sigma;
  const int T = trace.T;
  const std::vector<Point> comparators =
      comparator_grid(trace.box, grid_points_per_axis);

  BtlReport report;
  report.comparators = static_cast<int>(comparators.size());
  double worst = std::numeric_limits<double>::infinity();

  const Variant variant = trace.learner_config.variant;
  if (variant == Variant::oftpl) {
    if (!exact_oracle.exact()) {
      throw std::invalid_argument("probe_btl: oftpl leaders need an exact oracle");
    }
    // leaders[t] = argmin of f_{1..t+1?}; leaders.front() is the leader after
    // round 1. Built incrementally under the frozen sigma.
    Pwl1dAccumulator acc(trace.box);
    std::vector<Point> leaders;
    leaders.reserve(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) {
      acc.add(trace.losses[static_cast<std::size_t>(t - 1)]);
      leaders.push_back(acc.minimize(sigma[0]).minimizer);
    }
    double gamma_worst = 0.0;
    for (const auto& rr : trace.rounds) {
      gamma_worst =
          std::max(gamma_worst, rr.alpha + rr.beta * rr.sigma.cwiseAbs().sum());
    }
    if (std::isnan(gamma_worst)) {
      throw std::invalid_argument("probe_btl: trace has uncertified oracle rounds");
    }
    double guess_sum = 0.0;   // sum_t [g_t(x_t) - g_t(leader_{t+1})]
    double leader_sum = 0.0;  // sum_t f_t(leader_{t+1})
    for (int t = 1; t <= T; ++t) {
      const auto& f_t = trace.losses[static_cast<std::size_t>(t - 1)];
      const std::vector<LossFunction> prefix(trace.losses.begin(),
                                             trace.losses.begin() + (t - 1));
      const LossFunction g_t = make_guess(trace.learner_config.guess, prefix);
      const Point& x_t = trace.rounds[static_cast<std::size_t>(t - 1)].x;
      const Point& leader_next = leaders[static_cast<std::size_t>(t - 1)];
      guess_sum += g_t(x_t) - g_t(leader_next);
      leader_sum += f_t(leader_next);
    }
    const Point& leader_2 = leaders.front();
    for (const auto& xs : comparators) {
      double f_star = 0.0;
      for (const auto& f : trace.losses) f_star += f(xs);
      const double lhs = guess_sum + leader_sum - f_star;
      const double rhs = sigma.dot(leader_2 - xs) +
                         gamma_worst * static_cast<double>(T - 1);
      worst = std::min(worst, rhs - lhs);
    }
  } else {
    // ftpl / ftl: the one-step-ahead prediction at round t+1 is already in
    // the trace for t < T; one replay extends it past the horizon.
    std::vector<Point> next_preds;
    next_preds.reserve(static_cast<std::size_t>(T));
    double gamma_worst = 0.0;
    for (int t = 2; t <= T; ++t) {
      next_preds.push_back(trace.rounds[static_cast<std::size_t>(t - 1)].x);
    }
    const OracleAnswer replay =
        certified_minimize(trace.learner_config.oracle,
                           {trace.losses, std::nullopt, sigma, trace.box}, "probe_btl");
    next_preds.push_back(replay.minimizer);
    gamma_worst = replay.guarantee.gamma(sigma);
    for (const auto& rr : trace.rounds) {
      gamma_worst =
          std::max(gamma_worst, rr.alpha + rr.beta * rr.sigma.cwiseAbs().sum());
    }
    if (std::isnan(gamma_worst)) {
      throw std::invalid_argument("probe_btl: trace has uncertified oracle rounds");
    }
    double ahead_sum = 0.0;  // sum_t f_t(x_{t+1})
    for (int t = 1; t <= T; ++t) {
      ahead_sum += trace.losses[static_cast<std::size_t>(t - 1)](
          next_preds[static_cast<std::size_t>(t - 1)]);
    }
    const Point& x_2 = next_preds.front();
    for (const auto& xs : comparators) {
      double f_star = 0.0;
      for (const auto& f : trace.losses) f_star += f(xs);
      const double lhs = ahead_sum - f_star;
      const double rhs =
          gamma_worst * static_cast<double>(T) + sigma.dot(x_2 - xs);
      worst = std::min(worst, rhs - lhs);
    }
  }
  report.worst_slack = worst;
  report.pass = worst >= -kProbeTol;
  return report;
}

// ---------------------------------------------------------------------------
// Aggregate checks
// ---------------------------------------------------------------------------

StabilityCheck stability_check(const std::vector<GameTrace>& traces, double eta,
                               double L, int d, double D,
                               const OracleGuarantee& guarantee) {
  if (traces.size() < 30) {
    throw std::invalid_argument(
        "stability_check: need at least 30 frozen-sigma replications");
  }
  if (!guarantee.certified) {
    throw std::invalid_argument("stability_check: needs a certified (alpha,beta)");
  }
  for (const auto& tr : traces) {
    if (!tr.frozen_sigma) {
      throw std::invalid_argument("stability_check: all traces must be frozen-sigma");
    }
  }
  const auto n = static_cast<int>(traces.size());
  double mean = 0.0;
  for (const auto& tr : traces) mean += tr.stability_mean();
  mean /= n;
  double ss = 0.0;
  for (const auto& tr : traces) {
    const double dev = tr.stability_mean() - mean;
    ss += dev * dev;
  }
  const double sd = std::sqrt(ss / (n - 1));

  StabilityCheck check;
  check.mean = mean;
  check.sd = sd;
  check.ci_half = 1.96 * sd / std::sqrt(static_cast<double>(n));
  check.replications = n;
  const double dd = static_cast<double>(d);
  check.bound = 125.0 * eta * L * dd * dd * D +
                guarantee.beta * dd / (20.0 * eta * L) + 2.0 * guarantee.beta * dd +
                guarantee.alpha / (20.0 * L);
  check.pass = mean + check.ci_half <= check.bound;
  return check;
}

RateFit rate_fit(std::vector<RatePoint> points) {
  std::vector<int> ts;
  for (const auto& p : points) {
    if (!(p.mean_regret > 0)) {
      throw std::invalid_argument(
          "rate_fit: mean regret must be positive at every T (run more "
          "replications)");
    }
    ts.push_back(p.T);
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  if (ts.size() < 4) {
    throw std::invalid_argument("rate_fit: need at least 4 distinct T values");
  }

  const auto n = static_cast<double>(points.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& p : points) {
    mx += std::log(static_cast<double>(p.T));
    my += std::log(p.mean_regret);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : points) {
    const double dx = std::log(static_cast<double>(p.T)) - mx;
    const double dy = std::log(p.mean_regret) - my;
    sxx += dx * dx;
    sxy += dx * dy;
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (const auto& p : points) {
    const double y = std::log(p.mean_regret);
    const double yhat = fit.intercept + fit.slope * std::log(static_cast<double>(p.T));
    ss_res += (y - yhat) * (y - yhat);
    ss_tot += (y - my) * (y - my);
  }
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.points = std::move(points);
  return fit;
}

std::map<std::string, Aggregate> replicate(
    const std::function<MetricMap(int)>& run_one, int n, int workers) {
  if (n < 1) throw std::invalid_argument("replicate: n must be >= 1");
  workers = std::max(1, std::min(workers, n));

  std::vector<MetricMap> results(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  std::mutex err_mutex;
  int first_failed = -1;
  std::string first_error;

  auto body = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        results[static_cast<std::size_t>(i)] = run_one(i);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (first_failed < 0 || i < first_failed) {
          first_failed = i;
          first_error = e.what();
        }
      }
    }
  };

  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }
  if (first_failed >= 0) {
    std::ostringstream os;
    os << "replicate: replication " << first_failed << " failed: " << first_error;
    throw std::runtime_error(os.str());
  }

  std::map<std::string, Aggregate> agg;
  for (const auto& [key, _] : results.front()) {
    Aggregate a;
    a.n = n;
    double mean = 0.0;
    for (const auto& r : results) mean += r.at(key);
    mean /= n;
    a.mean = mean;
    if (n >= 2) {
      double ss = 0.0;
      for (const auto& r : results) {
        const double dev = r.at(key) - mean;
        ss += dev * dev;
      }
      a.sd = std::sqrt(ss / (n - 1));
      a.ci_half = 1.96 * a.sd / std::sqrt(static_cast<double>(n));
      a.sd_defined = true;
    } else {
      a.sd = std::numeric_limits<double>::quiet_NaN();
      a.ci_half = 0.0;
      a.sd_defined = false;
    }
    agg.emplace(key, a);
  }
  return agg;
}

}  // namespace ftpl
