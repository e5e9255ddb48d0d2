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

#include <cmath>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "popadj/coxmodel.hpp"
#include "popadj/datagen.hpp"
#include "popadj/errors.hpp"

using namespace popadj;
using popadj::testing::brute_force_loglik;
using popadj::testing::brute_force_residuals;
using popadj::testing::fd_gradient;
using popadj::testing::random_cox_data;

namespace {

CoxData tiny(std::initializer_list<std::array<double, 3>> rows) {
  CoxData d;
  const auto n = static_cast<Eigen::Index>(rows.size());
  d.time.resize(n);
  d.event.resize(n);
  d.x.resize(n, 1);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    d.time[i] = r[0];
    d.event[i] = static_cast<int>(r[1]);
    d.x(i, 0) = r[2];
    ++i;
  }
  return d;
}

EstimationError::Kind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const EstimationError& e) {
    return e.kind();
  }
  FAIL("expected an EstimationError");
  return EstimationError::Kind::kNoEvents;
}

}  // namespace

TEST_CASE("four-subject fit matches a grid search over the written-out likelihood") {
  // (time, event, trt) = (1,1,1), (2,1,0), (3,1,1), (4,1,0)
  const CoxData d = tiny({{1, 1, 1}, {2, 1, 0}, {3, 1, 1}, {4, 1, 0}});
  const auto explicit_pl = [](double b) {
    const double e = std::exp(b);
    return (e / (2 * e + 2)) * (1 / (e + 2)) * (e / (e + 1)) * 1.0;
  };
  double best_b = -5, best = -1;
  for (double b = -5; b <= 5; b += 1e-4)
    if (explicit_pl(b) > best) {
      best = explicit_pl(b);
      best_b = b;
    }
  const CoxFit fit = fit_cox(d);
  CHECK(std::abs(fit.coefs[0] - best_b) < 2e-4);
  // Score equation reduces to e^2b - e^b - 4 = 0.
  const double closed_form = std::log((1.0 + std::sqrt(17.0)) / 2.0);
  CHECK(std::abs(fit.coefs[0] - closed_form) < 1e-8);
  CHECK(fit.loglik == doctest::Approx(std::log(explicit_pl(closed_form))).epsilon(1e-12));
  CHECK(fit.converged);
}

TEST_CASE("unit weights give the same fit as no weights") {
  RandomStream rng(11);
  const CoxData d = random_cox_data(rng, 80, 3);
  const CoxFit a = fit_cox(d);
  const CoxFit b = fit_cox(d, ObservationWeights::unit(d.size()));
  CHECK((a.coefs - b.coefs).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((a.model_vcov - b.model_vcov).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("monotone partial likelihood is reported as separation") {
  const CoxData d = tiny({{1, 1, 1}, {2, 1, 0}});
  CHECK(kind_of([&] { fit_cox(d); }) == EstimationError::Kind::kSeparation);
  // Score and information die out exponentially here: a small score alone
  // would stop the iteration near beta = 10.
  const CoxData wide = tiny({{2, 1, 1.62769}, {5, 0, -1.92048}});
  CHECK(kind_of([&] { fit_cox(wide); }) == EstimationError::Kind::kSeparation);
  const CoxData shallow = tiny({{1, 1, 0.0611504}, {4, 1, -1.67023}});
  CHECK(kind_of([&] { fit_cox(shallow); }) == EstimationError::Kind::kSeparation);
}

TEST_CASE("no events and rank deficiency are estimation errors") {
  CoxData d = tiny({{1, 0, 1}, {2, 0, 0}, {3, 0, 1}});
  CHECK(kind_of([&] { fit_cox(d); }) == EstimationError::Kind::kNoEvents);

  RandomStream rng(5);
  CoxData dup = random_cox_data(rng, 40, 2);
  dup.x.col(1) = 2.0 * dup.x.col(0);
  CHECK(kind_of([&] { fit_cox(dup); }) == EstimationError::Kind::kRankDeficient);

  CoxData constant = random_cox_data(rng, 40, 1);
  constant.x.setConstant(1.0);
  CHECK(kind_of([&] { fit_cox(constant); }) == EstimationError::Kind::kRankDeficient);
}

TEST_CASE("log partial likelihood agrees with the O(n^2) definition, with ties and weights") {
  RandomStream rng(21);
  CoxData d = random_cox_data(rng, 40, 2);
  for (Eigen::Index i = 0; i < d.time.size(); i += 3) d.time[i] = std::round(d.time[i] * 4) / 4 + 0.25;
  std::vector<double> w(d.size());
  for (double& wi : w) wi = 0.2 + rng.uniform_open();
  const Eigen::VectorXd beta = Eigen::Vector2d(0.3, -0.7);
  CHECK(log_partial_likelihood(d, w, beta) ==
        doctest::Approx(brute_force_loglik(d, w, beta)).epsilon(1e-12));
  CHECK(log_partial_likelihood(d, {}, beta) ==
        doctest::Approx(brute_force_loglik(d, {}, beta)).epsilon(1e-12));
}

TEST_CASE("analytic score and information match finite differences") {
  RandomStream rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const CoxData d = random_cox_data(rng, 30 + rep, 3);
    std::vector<double> w(d.size());
    for (double& wi : w) wi = std::exp(rng.normal());
    Eigen::VectorXd beta(3);
    for (int k = 0; k < 3; ++k) beta[k] = 0.5 * rng.normal();

    const ScoreInformation si = score_and_information(d, w, beta);
    const auto ll = [&](const Eigen::VectorXd& b) { return log_partial_likelihood(d, w, b); };
    const Eigen::VectorXd fd = fd_gradient(ll, beta);
    for (Eigen::Index k = 0; k < 3; ++k)
      CHECK(std::abs(si.score[k] - fd[k]) <= 1e-6 * std::max(1.0, std::abs(fd[k])));

    CHECK((si.information - si.information.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    for (Eigen::Index k = 0; k < 3; ++k) {
      const auto score_k = [&](const Eigen::VectorXd& b) {
        return score_and_information(d, w, b).score[k];
      };
      const Eigen::VectorXd row = fd_gradient(score_k, beta);
      for (Eigen::Index j = 0; j < 3; ++j)
        CHECK(std::abs(si.information(k, j) + row[j]) <= 1e-5 * std::max(1.0, std::abs(row[j])));
    }
  }
}

TEST_CASE("score vanishes at the fitted coefficients") {
  RandomStream rng(8);
  const CoxData d = random_cox_data(rng, 200, 3);
  const CoxFit fit = fit_cox(d);
  const ScoreInformation si = score_and_information(d, {}, fit.coefs);
  CHECK(si.score.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("score residuals match the brute-force formula and sum to the score") {
  RandomStream rng(17);
  CoxData d = random_cox_data(rng, 35, 2);
  d.time[3] = d.time[4];  // a tie
  std::vector<double> w(d.size());
  for (double& wi : w) wi = 0.1 + 2 * rng.uniform_open();
  const Eigen::VectorXd beta = Eigen::Vector2d(-0.4, 0.9);

  const Eigen::MatrixXd u = score_residuals(d, w, beta);
  const Eigen::MatrixXd oracle = brute_force_residuals(d, w, beta);
  CHECK((u - oracle).cwiseAbs().maxCoeff() < 1e-10);

  Eigen::VectorXd weighted_sum = Eigen::VectorXd::Zero(2);
  for (Eigen::Index i = 0; i < u.rows(); ++i) weighted_sum += w[static_cast<std::size_t>(i)] * u.row(i).transpose();
  const auto ll = [&](const Eigen::VectorXd& b) { return log_partial_likelihood(d, w, b); };
  const Eigen::VectorXd fd = fd_gradient(ll, beta);
  for (Eigen::Index k = 0; k < 2; ++k)
    CHECK(std::abs(weighted_sum[k] - fd[k]) <= 1e-6 * std::max(1.0, std::abs(fd[k])));
}

TEST_CASE("robust variance equals the sandwich built from brute-force residuals") {
  RandomStream rng(23);
  const CoxData d = random_cox_data(rng, 60, 2);
  std::vector<double> w(d.size());
  for (double& wi : w) wi = 0.5 + rng.uniform_open();
  const CoxFit fit = fit_cox(d, ObservationWeights(w));
  const Eigen::MatrixXd u = brute_force_residuals(d, w, fit.coefs);
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(2, 2);
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const Eigen::VectorXd wu = w[static_cast<std::size_t>(i)] * u.row(i).transpose();
    meat += wu * wu.transpose();
  }
  const Eigen::MatrixXd expected = fit.model_vcov * meat * fit.model_vcov;
  CHECK((fit.robust_vcov - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("scaling all weights leaves the point estimate unchanged") {
  RandomStream rng(29);
  const CoxData d = random_cox_data(rng, 120, 2);
  std::vector<double> w(d.size());
  for (double& wi : w) wi = std::exp(0.5 * rng.normal());
  const CoxFit base = fit_cox(d, ObservationWeights(w));
  for (double c : {1e-3, 0.37, 12.0, 4e3}) {
    std::vector<double> scaled = w;
    for (double& s : scaled) s *= c;
    const CoxFit fit = fit_cox(d, ObservationWeights(scaled));
    CHECK((fit.coefs - base.coefs).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("robust and model SEs agree in a large well-specified sample") {
  RandomStream rng(31);
  const int n = 20000;
  CoxData d;
  d.time.resize(n);
  d.event.resize(n);
  d.x.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    d.x(i, 0) = i % 2;
    d.time[i] = -std::log(rng.uniform_open()) / std::exp(-0.5 * d.x(i, 0));
    d.event[i] = 1;
  }
  const CoxFit fit = fit_cox(d);
  CHECK(std::abs(fit.robust_se(0) / fit.model_se(0) - 1.0) < 0.05);
  CHECK(std::abs(fit.coefs[0] + 0.5) < 3 * fit.model_se(0));
}

TEST_CASE("treatment coefficient is recovered from the Weibull generator") {
  CovariateSpec spec = CovariateSpec::uniform(0.6, 0.2, 0.0);
  OutcomeModelParams params;
  params.treatment_coef = std::log(0.25);
  RandomStream rng(101);
  const IpdTrial trial = generate_trial(spec, params, 100000, rng);
  const CoxFit fit = fit_cox(treatment_only_cox_data(trial));
  CHECK(std::abs(fit.coefs[0] - std::log(0.25)) < 3 * fit.model_se(0));
}

TEST_CASE("observation weights reject invalid input") {
  CHECK_THROWS_AS(ObservationWeights({0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(ObservationWeights({1.0, -1.0}), DomainError);
  CHECK_THROWS_AS(ObservationWeights({1.0, std::nan("")}), DomainError);
  CHECK(ObservationWeights({0.0, 2.0}).sum() == 2.0);
}
