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

#pragma once

#include "popadj/datagen.hpp"
#include "popadj/estimate.hpp"

namespace popadj {

struct IntervalEstimate {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
};

/// Anchored A vs B: (A vs C) - (B vs C), variances summed. The two
/// within-trial estimates are independent so there is no covariance term.
EstimateWithSE indirect_comparison(const EstimateWithSE& ac, const EstimateWithSE& bc);

/// Two-sided standard normal quantile z_(1 - (1 - level)/2).
double normal_critical_value(double level);

/// point +/- z * se with the exact normal quantile (1.959964 at 95%).
IntervalEstimate confidence_interval(const EstimateWithSE& est, double level = 0.95);

/// Unadjusted treatment-only Cox fit of the IPD (marginal A vs C, model SE).
EstimateWithSE unadjusted_effect(const IpdTrial& ipd);

/// Bucher indirect comparison: unadjusted A vs C combined with the
/// published B vs C effect.
EstimateWithSE bucher_estimate(const IpdTrial& ipd, const AldSummary& bc);

}  // namespace popadj
