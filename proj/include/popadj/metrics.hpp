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

#include <iosfwd>
#include <span>
#include <vector>

#include "popadj/simengine.hpp"

namespace popadj {

/// Standardized bias above this magnitude (percent of the empirical SE) is
/// considered problematic.
inline constexpr double kProblematicStdBiasPct = 50.0;

struct PerformanceSummary {
  int scenario_id = 0;
  Method method = Method::kMaic;
  int n_used = 0;
  double bias = 0.0;
  double bias_mcse = 0.0;
  double standardized_bias_pct = 0.0;
  double ese = 0.0;
  double ese_mcse = 0.0;
  double variability_ratio = 0.0;
  double coverage = 0.0;
  double coverage_mcse = 0.0;
  double mse = 0.0;
  double mse_mcse = 0.0;
  double mean_model_se = 0.0;
  double mean_ess = 0.0;  // MAIC only; not part of the summary CSV

  bool problematic_bias() const;
};

// Monte Carlo standard errors, S = number of replicates.
double bias_mcse(double ese, int n);
double ese_mcse(double ese, int n);
double coverage_mcse(double coverage, int n);
/// sqrt( sum((e_s - mse)^2) / (S (S-1)) ) with e_s the squared errors.
double mse_mcse(std::span<const double> squared_errors, double mse);

/// Performance of one (scenario, method) cell from its ok estimates.
PerformanceSummary summarize_cell(std::span<const double> estimates, std::span<const double> ses,
                                  double truth = kTrueEffect, double level = 0.95);

/// One summary per (scenario, method), sorted. Non-ok rows are excluded and
/// n_used records how many remained. Throws DomainError if any cell has
/// fewer than two ok replicates.
std::vector<PerformanceSummary> summarize(std::vector<ReplicateResult> results,
                                          double truth = kTrueEffect, double level = 0.95);

void write_summary_csv(std::ostream& os, const std::vector<PerformanceSummary>& rows);
std::vector<PerformanceSummary> read_summary_csv(std::istream& is);

}  // namespace popadj
