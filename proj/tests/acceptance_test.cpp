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
//
// End-to-end acceptance suite. Each test case covers one numbered criterion
// and prints a single PASS/FAIL line; run via ctest or directly.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "ftpl/experiments.hpp"
#include "ftpl/harness.hpp"
#include "ftpl/saddle.hpp"

using namespace ftpl;
namespace fs = std::filesystem;

namespace {

Vector vec1(double x) {
  Vector v(1);
  v[0] = x;
  return v;
}

Box box1(double lo, double hi) { return Box(vec1(lo), vec1(hi)); }

LearnerConfig exact_ftpl(double eta, PerturbationMode mode = PerturbationMode::fresh) {
  LearnerConfig c;
  c.variant = Variant::ftpl;
  c.eta = eta;
  c.perturbation = mode;
  return c;
}

void report(int criterion, const char* name, bool pass) {
  std::printf("[ACCEPT] %2d %-28s %s\n", criterion, name, pass ? "PASS" : "FAIL");
  std::fflush(stdout);
}

int hw_workers() { return 2; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("criterion 1: deterministic leader versus killer") {
  const auto start = std::chrono::steady_clock::now();
  const Box box = box1(-10, 10);
  LearnerConfig ftl;
  ftl.variant = Variant::ftl;
  const GameTrace trace = play(ftl, Adversary::killer(10.0), box, 1000, 1);
  const RegretReport rep = regret(trace, OracleConfig{});
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const bool cum_ok = std::abs(rep.learner_cum_loss - 5000.0) <= 1e-9;
  const bool best_ok = rep.best_value <= 2500.0 + 1e-9;
  const bool regret_ok = rep.avg_regret >= 2.5 - 1e-9;
  const bool fast = elapsed < 5.0;
  report(1, "killer-reproduction", cum_ok && best_ok && regret_ok && fast);
  CHECK(cum_ok);
  CHECK(best_ok);
  CHECK(regret_ok);
  CHECK(fast);
}

TEST_CASE("criterion 2: ftpl regret rate on oblivious hinges") {
  const Box box = box1(-5, 5);
  const int reps = 100;
  std::vector<RatePoint> pts;
  for (int T : {128, 256, 512, 1024, 2048, 4096, 8192, 16384}) {
    const LearnerConfig cfg = exact_ftpl(default_eta(1, 1, T));
    const auto agg = replicate(
        [&](int rep) {
          const std::uint64_t seed = RngStream(42).fork(T).fork(rep).word(0);
          const Adversary adv =
              make_adversary({}, box, T, RngStream(seed).fork(kGameAdversaryTag));
          const GameTrace tr = play(cfg, adv, box, T, seed);
          return MetricMap{{"regret", regret(tr, OracleConfig{}).avg_regret}};
        },
        reps, hw_workers());
    pts.push_back({T, agg.at("regret").mean, agg.at("regret").ci_half});
  }
  const RateFit fit = rate_fit(pts);
  std::printf("         regret rate: slope %.4f, r2 %.4f\n", fit.slope, fit.r2);
  for (const auto& p : pts) {
    std::printf("         T=%5d regret %.5f +- %.5f\n", p.T, p.mean_regret, p.ci_half);
  }
  const bool slope_ok = fit.slope >= -0.65 && fit.slope <= -0.35;
  const bool r2_ok = fit.r2 >= 0.9;
  // Mean regret never increases with the horizon beyond CI overlap.
  bool monotone_ok = true;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    if (pts[k + 1].mean_regret >
        pts[k].mean_regret + pts[k].ci_half + pts[k + 1].ci_half) {
      monotone_ok = false;
    }
  }
  report(2, "regret-rate-fit", slope_ok && r2_ok && monotone_ok);
  CHECK(slope_ok);
  CHECK(r2_ok);
  CHECK(monotone_ok);
}

TEST_CASE("criterion 3: quantitative stability bound") {
  const Box box = box1(-5, 5);
  bool all_ok = true;
  for (const double eta : {0.01, 0.05}) {
    std::vector<GameTrace> traces;
    for (int rep = 0; rep < 100; ++rep) {
      const std::uint64_t seed =
          RngStream(300).fork(static_cast<std::uint64_t>(eta * 1000)).fork(rep).word(0);
      const Adversary adv =
          make_adversary({}, box, 200, RngStream(seed).fork(kGameAdversaryTag));
      traces.push_back(
          play(exact_ftpl(eta, PerturbationMode::frozen), adv, box, 200, seed));
    }
    const StabilityCheck check =
        stability_check(traces, eta, 1.0, 1, 10.0, OracleGuarantee::exact());
    std::printf("         eta=%.2f: mean %.4f + ci %.4f vs bound %.1f\n", eta,
                check.mean, check.ci_half, check.bound);
    CHECK(check.bound == doctest::Approx(eta == 0.01 ? 12.5 : 62.5));
    CHECK(check.pass);
    all_ok = all_ok && check.pass;
  }
  report(3, "stability-bound", all_ok);
}

TEST_CASE("criterion 4: monotonicity probe suites") {
  const Box box = box1(-5, 5);
  const OracleConfig exact{};
  OracleConfig grid_cfg;
  grid_cfg.kind = OracleConfig::Kind::grid;
  grid_cfg.h = 0.01;
  const OracleConfig grid = grid_cfg;

  bool all_ok = true;
  for (const OracleConfig* oracle : {&exact, &grid}) {
    for (const int suite : {0, 1, 2}) {
      int passes = 0;
      int na = 0;
      const int n = 1000;
      for (int k = 0; k < n; ++k) {
        const RngStream ps =
            RngStream(4040).fork(static_cast<std::uint64_t>(suite + (oracle == &grid ? 3 : 0))).fork(k);
        StreamCursor cur(ps.fork(0));
        const int t = 1 + static_cast<int>(cur.next_uniform() * 12.0);
        const auto losses = oblivious_hinge_sequence(box, t, ps.fork(1));
        const Vector sigma = vec1(-std::log1p(-cur.next_uniform()) / 0.3);
        ProbeResult r;
        if (suite == 0) {
          r = probe_monotone1(losses, box, 0, cur.next_uniform(0.01, 10.0), sigma,
                              *oracle);
        } else if (suite == 1) {
          r = probe_monotone2(losses, box, 0, 1.0, sigma, *oracle);
        } else {
          const auto guess = static_cast<GuessStrategy>(k % 3);
          const std::vector<LossFunction> prefix(losses.begin(), losses.end() - 1);
          const double l_t = std::max(
              1e-6, losses.back().lipschitz() + make_guess(guess, prefix).lipschitz());
          r = probe_monotone_oftpl(losses, box, 0, guess, l_t, sigma, *oracle, exact);
        }
        if (!r.applicable) {
          ++na;
        } else if (r.pass) {
          ++passes;
        }
      }
      const bool ok = passes == n - na && na == 0;
      all_ok = all_ok && ok;
      CHECK(passes == n - na);
      CHECK(na == 0);  // the d=1 guard always holds
    }
  }
  report(4, "monotonicity-probes", all_ok);
}

TEST_CASE("criterion 5: one-step-ahead leader inequality") {
  const Box box = box1(-5, 5);
  bool all_ok = true;
  for (int variant = 0; variant < 2; ++variant) {
    for (int k = 0; k < 100; ++k) {
      LearnerConfig cfg = exact_ftpl(0.5, PerturbationMode::frozen);
      if (variant == 1) {
        cfg.variant = Variant::oftpl;
        cfg.guess = static_cast<GuessStrategy>(k % 3);
      }
      const std::uint64_t seed = RngStream(5050).fork(variant).fork(k).word(0);
      const Adversary adv =
          make_adversary({}, box, 50, RngStream(seed).fork(kGameAdversaryTag));
      const GameTrace trace = play(cfg, adv, box, 50, seed);
      const BtlReport rep = probe_btl(trace, 201, OracleConfig{});
      all_ok = all_ok && rep.pass && rep.comparators == 201;
      CHECK(rep.pass);
    }
  }
  report(5, "leader-inequality", all_ok);
}

TEST_CASE("criterion 6: oracle contract and exact-backend cross-check") {
  const Box box = box1(-10, 10);
  const double diameter = box.linf_diameter();
  bool contracts_ok = true;
  bool values_ok = true;
  const int n = 1000;

  std::vector<OracleQuery> queries;
  queries.reserve(n);
  for (int q = 0; q < n; ++q) {
    StreamCursor cur{RngStream(6060).fork(q)};
    const int n_losses = static_cast<int>(cur.next_uniform() * 9.0);
    std::vector<LossFunction> losses;
    for (int i = 0; i < n_losses; ++i) {
      // Lattice-snapped centers keep every breakpoint on the brute grid.
      const double c = std::round(cur.next_uniform(-10, 10) * 1e4) / 1e4;
      losses.push_back(LossFunction::hinge(vec1(c), diameter));
    }
    Vector sigma = vec1(-std::log1p(-cur.next_uniform()) / 0.5);
    queries.push_back(OracleQuery{std::move(losses), std::nullopt, std::move(sigma), box});
  }

  for (const auto& q : queries) {
    const OracleAnswer exact = pwl1d_minimize(q);
    for (const double h : {0.1, 0.01}) {
      if (!contract_check(grid_minimize(q, h), q, exact.value)) contracts_ok = false;
    }
    // Exhaustive 1e-4 grid; breakpoints lie on it by construction.
    double brute = std::numeric_limits<double>::infinity();
    Vector x(1);
    for (long long k = 0; k <= 200000; ++k) {
      x[0] = -10.0 + 1e-4 * static_cast<double>(k);
      brute = std::min(brute, q.objective(x));
    }
    if (std::abs(exact.value - brute) > 1e-9) values_ok = false;
  }
  report(6, "oracle-contract", contracts_ok && values_ok);
  CHECK(contracts_ok);
  CHECK(values_ok);
}

TEST_CASE("criterion 7: optimistic advantage on slowly varying losses") {
  const Box box = box1(-5, 5);
  const int T = 2048;
  const int n = 50;
  AdversaryConfig slow;
  slow.kind = AdversaryConfig::Kind::slowly_varying;
  slow.block = 10;

  double sum = 0.0;
  double sum_sq = 0.0;
  for (int rep = 0; rep < n; ++rep) {
    const std::uint64_t seed = RngStream(7070).fork(rep).word(0);
    const Adversary adv =
        make_adversary(slow, box, T, RngStream(seed).fork(kGameAdversaryTag));
    LearnerConfig plain = exact_ftpl(default_eta(1, 1, T));
    LearnerConfig optimistic = plain;
    optimistic.variant = Variant::oftpl;
    optimistic.guess = GuessStrategy::last_loss;
    // Matched seeds: same loss sequence, same perturbation stream.
    const double r_plain = regret(play(plain, adv, box, T, seed), OracleConfig{}).avg_regret;
    const double r_opt =
        regret(play(optimistic, adv, box, T, seed), OracleConfig{}).avg_regret;
    const double d = r_plain - r_opt;
    sum += d;
    sum_sq += d * d;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sum_sq - n * mean * mean) / (n - 1));
  const double ci = 1.96 * sd / std::sqrt(static_cast<double>(n));
  std::printf("         paired diff (ftpl - oftpl): %.5f +- %.5f\n", mean, ci);
  const bool ok = mean - ci >= 0.0;
  report(7, "optimistic-advantage", ok);
  CHECK(ok);
}

TEST_CASE("criterion 8: bilinear saddle self-play") {
  const auto payoff = PayoffFunction::bilinear(box1(-1, 1), box1(-1, 1));
  const int T = 8192;
  const LearnerConfig cfg = exact_ftpl(default_eta(1, 1, T));
  bool all_ok = true;
  for (int run = 0; run < 5; ++run) {
    const std::uint64_t seed = RngStream(8080).fork(run).word(0);
    const SaddleResult sr = solve_saddle(payoff, T, cfg, cfg, seed);
    const GapReport gap = duality_gap(payoff, sr.mix_x, sr.mix_y, OracleConfig{});
    const RegretReport rx = regret(sr.trace_x, OracleConfig{});
    const RegretReport ry = regret(sr.trace_y, OracleConfig{});
    const bool gap_ok = gap.gap + 2 * gap.alpha_band <= 0.15;
    const bool identity_ok =
        gap.gap <= rx.avg_regret + ry.avg_regret + 2 * gap.alpha_band + 1e-9;
    std::printf("         run %d: gap %.4f, regret sum %.4f\n", run, gap.gap,
                rx.avg_regret + ry.avg_regret);
    all_ok = all_ok && gap_ok && identity_ok;
    CHECK(gap_ok);
    CHECK(identity_ok);
  }
  report(8, "saddle-self-play", all_ok);
}

TEST_CASE("criterion 9: perturbation sampler correctness") {
  const int n = 1'000'000;
  bool ok = true;
  int salt = 0;
  for (const double eta : {0.5, 1.0, 2.0}) {
    const auto sigma = sample_perturbation(eta, n, RngStream(9090 + salt++)).sigma;
    const double mean = sigma.mean();
    if (std::abs(mean - 1.0 / eta) > 0.01 * (1.0 / eta)) ok = false;
    for (const double mult : {0.5, 1.0, 2.0}) {
      const double s = mult / eta;
      const double surv =
          (sigma.array() >= s).cast<double>().sum() / static_cast<double>(n);
      if (std::abs(surv - std::exp(-eta * s)) > 0.005) ok = false;
    }
  }
  report(9, "sampler-correctness", ok);
  CHECK(ok);
}

TEST_CASE("criterion 10: byte-identical reruns of every preset") {
  const fs::path configs(FTPL_CONFIG_DIR);
  const fs::path base = fs::temp_directory_path() / "ftpl_acceptance_repro";
  fs::remove_all(base);
  bool all_ok = true;
  for (const auto& entry : fs::directory_iterator(configs)) {
    if (entry.path().extension() != ".json") continue;
    const ExperimentConfig cfg = load_experiment_config(entry.path());
    const std::string stem = entry.path().stem().string();

    RunOverrides a;
    a.out_dir = (base / (stem + "_a")).string();
    a.workers = 1;
    RunOverrides b;
    b.out_dir = (base / (stem + "_b")).string();
    b.workers = 2;
    const RunResult ra = run_experiment(cfg, a);
    const RunResult rb = run_experiment(cfg, b);
    CHECK(ra.checks_passed);
    CHECK(rb.checks_passed);

    for (const auto& fa : ra.files) {
      if (fa.extension() != ".csv") continue;
      const fs::path fb = fs::path(*b.out_dir) / fa.filename();
      const bool same = slurp(fa) == slurp(fb);
      if (!same) {
        std::printf("         mismatch: %s (%s)\n", fa.filename().string().c_str(),
                    stem.c_str());
      }
      all_ok = all_ok && same;
      CHECK(same);
    }
  }
  report(10, "reproducible-outputs", all_ok);
}
