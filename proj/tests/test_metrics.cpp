// Copyright 2026 The popadjust Authors
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

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "popadj/errors.hpp"
#include "popadj/metrics.hpp"
#include "popadj/rng.hpp"

using namespace popadj;

namespace {

ReplicateResult row(int scenario, int rep, Method m, double est, double se, Status st = Status::kOk) {
  ReplicateResult r;
  r.scenario_id = scenario;
  r.replicate_id = rep;
  r.method = m;
  r.status = st;
  if (st == Status::kOk) {
    r.estimate = est;
    r.se = se;
  }
  return r;
}

}  // namespace

TEST_CASE("two-replicate hand computation") {
  const std::vector<double> est{0.1, -0.1}, se{1.0, 1.0};
  const PerformanceSummary p = summarize_cell(est, se);
  CHECK(p.n_used == 2);
  CHECK(p.bias == doctest::Approx(0.0));
  CHECK(p.ese == doctest::Approx(0.1414213562).epsilon(1e-9));
  CHECK(p.variability_ratio == doctest::Approx(7.0710678).epsilon(1e-7));
  CHECK(p.coverage == 1.0);
  CHECK(p.mse == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(p.mean_model_se == 1.0);
}

TEST_CASE("estimates equal to the truth") {
  const std::vector<double> est(10, 0.25), se(10, 0.05);
  const PerformanceSummary p = summarize_cell(est, se, 0.25);
  CHECK(p.bias == 0.0);
  CHECK(p.coverage == 1.0);
  CHECK(p.mse == 0.0);
  CHECK(p.coverage_mcse == 0.0);
}

TEST_CASE("model SE equal to the empirical SD gives VR = 1") {
  RandomStream rng(5);
  std::vector<double> est(300);
  for (double& e : est) e = 0.2 * rng.normal();
  const double sd = summarize_cell(est, std::vector<double>(300, 1.0)).ese;
  const PerformanceSummary p = summarize_cell(est, std::vector<double>(300, sd));
  CHECK(p.variability_ratio == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("MSE decomposes into bias and empirical variance") {
  RandomStream rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const int s = 2 + static_cast<int>(rng() % 500);
    std::vector<double> est(s), se(s);
    for (int i = 0; i < s; ++i) {
      est[i] = 0.3 + 0.5 * rng.normal();
      se[i] = 0.1 + rng.uniform_open();
    }
    const PerformanceSummary p = summarize_cell(est, se, -0.1);
    CHECK(std::abs(p.mse - (p.bias * p.bias + p.ese * p.ese * (s - 1) / s)) < 1e-10);
    CHECK(p.mse >= p.bias * p.bias - 1e-12);
    CHECK(p.standardized_bias_pct == doctest::Approx(100 * p.bias / p.ese).epsilon(1e-14));
    CHECK(p.coverage >= 0.0);
    CHECK(p.coverage <= 1.0);
  }
}

TEST_CASE("coverage uses |est - truth| <= z se with the exact quantile") {
  const double z = 1.959963984540054;
  // Just inside / just outside the exact bound, both inside 1.96.
  const std::vector<double> est{z * (1 - 1e-9), z * (1 + 1e-6), 0.0};
  const PerformanceSummary p = summarize_cell(est, std::vector<double>(3, 1.0));
  CHECK(p.coverage == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("Monte Carlo standard errors") {
  CHECK(bias_mcse(0.2, 1000) == doctest::Approx(0.0063245553).epsilon(1e-9));
  CHECK(ese_mcse(0.2, 1000) == doctest::Approx(0.2 / std::sqrt(1998.0)).epsilon(1e-14));
  CHECK(coverage_mcse(0.95, 1000) == doctest::Approx(0.006892024).epsilon(1e-8));
  CHECK(0.95 - 2 * coverage_mcse(0.95, 1000) == doctest::Approx(0.9365).epsilon(2e-4));
  CHECK(0.95 + 2 * coverage_mcse(0.95, 1000) == doctest::Approx(0.9635).epsilon(2e-4));
  CHECK(coverage_mcse(0.0, 1000) == 0.0);
  CHECK(coverage_mcse(1.0, 1000) == 0.0);
  const std::vector<double> sq{0.01, 0.04, 0.09};
  const double mse = 0.14 / 3;
  double ss = 0;
  for (double e : sq) ss += (e - mse) * (e - mse);
  CHECK(mse_mcse(sq, mse) == doctest::Approx(std::sqrt(ss / 6)).epsilon(1e-14));
}

TEST_CASE("problematic standardized bias threshold") {
  PerformanceSummary p;
  p.standardized_bias_pct = -50.0;
  CHECK_FALSE(p.problematic_bias());
  p.standardized_bias_pct = -50.1;
  CHECK(p.problematic_bias());
  p.standardized_bias_pct = 75.0;
  CHECK(p.problematic_bias());
}

TEST_CASE("summarize groups cells, drops failures and ignores row order") {
  RandomStream rng(8);
  std::vector<ReplicateResult> rows;
  for (int s : {3, 1})
    for (int r = 1; r <= 50; ++r)
      for (Method m : kMethods) {
        const Status st = (m == Method::kMaic && r % 10 == 0) ? Status::kWeightFailure : Status::kOk;
        rows.push_back(row(s, r, m, 0.1 * rng.normal(), 0.1, st));
      }
  const auto a = summarize(rows);
  std::reverse(rows.begin(), rows.end());
  std::rotate(rows.begin(), rows.begin() + 17, rows.end());
  const auto b = summarize(rows);
  REQUIRE(a.size() == 6);
  CHECK(a[0].scenario_id == 1);
  CHECK(a[0].method == Method::kMaic);
  CHECK(a[0].n_used == 45);
  CHECK(a[1].n_used == 50);
  CHECK(a[5].scenario_id == 3);
  CHECK(a[5].method == Method::kBucher);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].bias == b[i].bias);
    CHECK(a[i].ese == b[i].ese);
    CHECK(a[i].mse == b[i].mse);
    CHECK(a[i].mse_mcse == b[i].mse_mcse);
  }
}

TEST_CASE("fewer than two ok replicates cannot be summarized") {
  std::vector<ReplicateResult> rows{row(1, 1, Method::kStc, 0.1, 0.1), row(1, 2, Method::kStc, 0, 0, Status::kSeparation)};
  CHECK_THROWS_AS(summarize(rows), DomainError);
  CHECK_THROWS_AS(summarize_cell(std::vector<double>{0.1}, std::vector<double>{0.1}), DomainError);
}

TEST_CASE("summary CSV round trip") {
  std::vector<ReplicateResult> rows;
  RandomStream rng(9);
  for (int r = 1; r <= 20; ++r)
    for (Method m : kMethods) rows.push_back(row(7, r, m, rng.normal(), 0.3 + rng.uniform_open()));
  const auto sums = summarize(rows);
  std::stringstream ss;
  write_summary_csv(ss, sums);
  const std::string text = ss.str();
  CHECK(text.rfind("scenario_id,method,n_used,bias,bias_mcse,std_bias_pct,ese,ese_mcse,vr,coverage,"
                   "coverage_mcse,mse,mse_mcse,mean_model_se\n",
                   0) == 0);
  const auto back = read_summary_csv(ss);
  REQUIRE(back.size() == sums.size());
  for (std::size_t i = 0; i < sums.size(); ++i) {
    CHECK(back[i].method == sums[i].method);
    CHECK(back[i].bias == sums[i].bias);
    CHECK(back[i].coverage_mcse == sums[i].coverage_mcse);
    CHECK(back[i].mean_model_se == sums[i].mean_model_se);
  }
}
