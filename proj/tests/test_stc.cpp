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

#include "popadj/datagen.hpp"
#include "popadj/errors.hpp"
#include "popadj/itc.hpp"
#include "popadj/stc.hpp"

using namespace popadj;

namespace {

IpdTrial trial(double prog, double inter, double mean, std::size_t n, std::uint64_t seed) {
  OutcomeModelParams p;
  p.treatment_coef = std::log(0.25);
  p.prognostic_coefs.fill(prog);
  p.interaction_coefs = {inter, inter};
  RandomStream rng(seed);
  return generate_trial(CovariateSpec::uniform(mean, std::sqrt(0.2), 0.0), p, n, rng);
}

AldSummary targets(double a, double b) {
  AldSummary t;
  t.covariate_means = {a, b, 0.6, 0.6};
  return t;
}

}  // namespace

TEST_CASE("design layout: prognostic, treatment, centered interactions") {
  IpdTrial t;
  t.records = {{{0.1, 0.2, 0.3, 0.4}, 1, 1.0, 1}, {{0.5, 0.6, 0.7, 0.8}, 0, 2.0, 0}};
  const StcModelSpec spec;
  const CoxData d = stc_design(t, spec, {0.6, 0.5});
  REQUIRE(d.x.cols() == 7);
  CHECK(stc_treatment_column(spec) == 4);
  CHECK(d.x(0, 0) == 0.1);
  CHECK(d.x(0, 3) == 0.4);
  CHECK(d.x(0, 4) == 1.0);
  CHECK(d.x(0, 5) == doctest::Approx(-0.5));
  CHECK(d.x(0, 6) == doctest::Approx(-0.3));
  CHECK(d.x(1, 4) == 0.0);
  CHECK(d.x(1, 5) == 0.0);
  CHECK_THROWS_AS(stc_design(t, spec, {0.6}), ConfigError);
  StcModelSpec bad;
  bad.effect_modifier_columns = {5};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("centering is a reparametrization of the treatment coefficient") {
  const IpdTrial t = trial(-std::log(0.5), -std::log(0.5), 0.3, 600, 41);
  const StcModelSpec spec;
  const std::vector<double> c{0.6, 0.55};
  const StcResult centered = stc_fit(t, spec, c);
  const StcResult raw = stc_fit(t, spec, {0.0, 0.0});
  const auto& g = raw.fit.coefs;
  const double predicted = g[4] + g[5] * c[0] + g[6] * c[1];
  CHECK(std::abs(centered.effect.value() - predicted) < 1e-8);
  CHECK(std::abs(centered.fit.loglik - raw.fit.loglik) < 1e-10 * std::abs(raw.fit.loglik) + 1e-10);
  for (Eigen::Index j : {0, 1, 2, 3, 5, 6}) CHECK(std::abs(centered.fit.coefs[j] - g[j]) < 1e-8);
}

TEST_CASE("zero centering constants give the uncentered interaction model") {
  const IpdTrial t = trial(-std::log(0.67), -std::log(0.33), 0.45, 300, 43);
  StcModelSpec spec;
  const StcResult a = stc_estimate(t, targets(0.0, 0.0), spec);
  // The same model built by hand without any centering step.
  CoxData d;
  const auto n = static_cast<Eigen::Index>(t.size());
  d.time.resize(n);
  d.event.resize(n);
  d.x.resize(n, 7);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = t.records[static_cast<std::size_t>(i)];
    d.time[i] = r.time;
    d.event[i] = r.event;
    for (int k = 0; k < 4; ++k) d.x(i, k) = r.x[k];
    d.x(i, 4) = r.treatment;
    d.x(i, 5) = r.treatment * r.x[0];
    d.x(i, 6) = r.treatment * r.x[1];
  }
  const CoxFit b = fit_cox(d);
  CHECK((a.fit.coefs - b.coefs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("centering the prognostic columns too leaves the treatment effect unchanged") {
  const IpdTrial t = trial(-std::log(0.33), -std::log(0.67), 0.15, 600, 44);
  StcModelSpec only_em, all;
  all.center_effect_modifiers_only = false;
  const StcResult a = stc_estimate(t, targets(0.6, 0.6), only_em);
  const StcResult b = stc_estimate(t, targets(0.6, 0.6), all);
  CHECK(std::abs(a.effect.value() - b.effect.value()) < 1e-8);
  CHECK(a.effect.se() == doctest::Approx(b.effect.se()).epsilon(1e-6));
}

TEST_CASE("large-sample recovery without interactions") {
  const IpdTrial t = trial(-std::log(0.33), 0.0, 0.6, 100000, 45);
  const StcResult r = stc_estimate(t, targets(0.6, 0.6));
  CHECK(std::abs(r.effect.value() - std::log(0.25)) < 3 * r.effect.se());
}

TEST_CASE("missing effect-modifier target is a configuration error") {
  const IpdTrial t = trial(0.4, 0.4, 0.45, 150, 46);
  AldSummary a = targets(0.6, 0.6);
  a.covariate_means[1] = std::nan("");
  CHECK_THROWS_AS(stc_estimate(t, a), ConfigError);
}

TEST_CASE("non-collapsibility: marginal and conditional treatment effects differ") {
  const IpdTrial t = trial(-std::log(0.33), 0.0, 0.6, 100000, 47);
  const EstimateWithSE marginal = unadjusted_effect(t);
  const StcResult conditional = stc_estimate(t, targets(0.6, 0.6));
  const double gap = marginal.value() - conditional.effect.value();
  const double combined = std::hypot(marginal.se(), conditional.effect.se());
  INFO("marginal " << marginal.value() << " conditional " << conditional.effect.value());
  CHECK(std::abs(gap) > 5 * combined);
  CHECK(std::abs(marginal.value()) < std::abs(conditional.effect.value()));
}
