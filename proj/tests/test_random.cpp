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

#include <cmath>

#include <doctest.h>

#include "ftpl/random.hpp"

using namespace ftpl;

TEST_CASE("uniform draws lie in [0,1) and are deterministic") {
  RngStream s(42);
  for (std::uint64_t p = 0; p < 1000; ++p) {
    const double u = s.uniform(p);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == RngStream(42).uniform(p));
  }
}

TEST_CASE("forked streams decorrelate") {
  RngStream s(7);
  CHECK(s.fork(1).word(0) != s.fork(2).word(0));
  CHECK(s.fork(1).word(0) != s.word(0));
  CHECK(s.fork(1).fork(2).word(0) != s.fork(2).fork(1).word(0));
}

TEST_CASE("perturbation sampling is reproducible") {
  const RngStream s = RngStream(123).fork(5);
  const auto a = sample_perturbation(1.5, 8, s);
  const auto b = sample_perturbation(1.5, 8, s);
  CHECK(a.sigma == b.sigma);
  CHECK((a.sigma.array() >= 0.0).all());
  CHECK(a.sigma.size() == 8);
  CHECK(sample_perturbation(1.5, 8, RngStream(124)).sigma != a.sigma);
}

TEST_CASE("perturbation rejects bad arguments") {
  CHECK_THROWS_AS(sample_perturbation(0.0, 1, RngStream(0)), std::invalid_argument);
  CHECK_THROWS_AS(sample_perturbation(-1.0, 1, RngStream(0)), std::invalid_argument);
  CHECK_THROWS_AS(
      sample_perturbation(std::numeric_limits<double>::infinity(), 1, RngStream(0)),
      std::invalid_argument);
  CHECK_THROWS_AS(sample_perturbation(1.0, 0, RngStream(0)), std::invalid_argument);
}

TEST_CASE("sample mean matches 1/eta at eta=2 over 1e6 draws") {
  const int n = 1'000'000;
  const auto sigma = sample_perturbation(2.0, n, RngStream(2024)).sigma;
  const double mean = sigma.mean();
  CHECK(mean > 0.495);
  CHECK(mean < 0.505);
}

TEST_CASE("empirical survival at s=1 matches exp(-1) for eta=1") {
  const int n = 1'000'000;
  const auto sigma = sample_perturbation(1.0, n, RngStream(99)).sigma;
  const double surv = (sigma.array() >= 1.0).cast<double>().sum() / n;
  CHECK(surv > std::exp(-1.0) - 0.005);
  CHECK(surv < std::exp(-1.0) + 0.005);
}

TEST_CASE("distribution contract across eta values") {
  const int n = 1'000'000;
  int salt = 0;
  for (const double eta : {0.5, 1.0, 2.0}) {
    const auto sigma = sample_perturbation(eta, n, RngStream(7000 + salt++)).sigma;
    const double mean = sigma.mean();
    const double mean_tol = 3.0 * (1.0 / eta) / std::sqrt(double(n)) * 1.1;
    CHECK(std::abs(mean - 1.0 / eta) <= mean_tol);
    for (const double mult : {0.5, 1.0, 2.0}) {
      const double s = mult / eta;
      const double surv = (sigma.array() >= s).cast<double>().sum() / n;
      CHECK(std::abs(surv - std::exp(-eta * s)) <= 0.005);
    }
  }
}
