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

#include "popadj/itc.hpp"

#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "popadj/coxmodel.hpp"
#include "popadj/errors.hpp"

namespace popadj {

EstimateWithSE indirect_comparison(const EstimateWithSE& ac, const EstimateWithSE& bc) {
  return {ac.value() - bc.value(), std::sqrt(ac.variance() + bc.variance())};
}

double normal_critical_value(double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(),
                               1.0 - (1.0 - level) / 2.0);
}

IntervalEstimate confidence_interval(const EstimateWithSE& est, double level) {
  const double half = normal_critical_value(level) * est.se();
  return {est.value(), est.value() - half, est.value() + half, level};
}

EstimateWithSE unadjusted_effect(const IpdTrial& ipd) {
  ipd.validate();
  const CoxFit fit = fit_cox(treatment_only_cox_data(ipd));
  return {fit.coefs[0], fit.model_se(0)};
}

EstimateWithSE bucher_estimate(const IpdTrial& ipd, const AldSummary& bc) {
  return indirect_comparison(unadjusted_effect(ipd), bc.effect);
}

}  // namespace popadj
