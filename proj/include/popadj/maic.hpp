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

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "popadj/coxmodel.hpp"
#include "popadj/datagen.hpp"
#include "popadj/estimate.hpp"
#include "popadj/rng.hpp"

namespace popadj {

struct WeightOptions {
  // Convergence needs both: |dQ/dalpha| below grad_tol and the weighted
  // effect-modifier means within balance_tol of their targets.
  double grad_tol = 1e-8;
  double balance_tol = 1e-10;
  int max_iter = 500;
  // |alpha| beyond this is reported as having no finite solution. Off by
  // default: the scale of alpha follows the covariate units, and targets
  // well inside the hull can need |alpha| > 50.
  double alpha_bound = std::numeric_limits<double>::infinity();
  // Log-weights beyond this are not representable as doubles.
  double log_weight_bound = 700.0;
  int stall_limit = 20;
};

struct WeightSolution {
  Eigen::VectorXd alpha1;  // one coefficient per effect modifier
  ObservationWeights weights;
  double ess = 0.0;
  double objective_value = 0.0;  // Q(alpha1) = sum of weights
  int iterations = 0;
};

/// Effect-modifier columns of the IPD minus the comparator-trial means.
/// Targets for non-effect-modifier covariates are ignored.
Eigen::MatrixXd center_effect_modifiers(const IpdTrial& ipd, const AldSummary& targets,
                                        const std::vector<std::size_t>& effect_modifiers);

/// Method-of-moments trial-selection weights: alpha1 minimizes
/// Q(a) = sum_i exp(x_i a) over the centered effect modifiers, and
/// w_i = exp(x_i alpha1). The intercept is absorbed by the centering.
/// Newton with step-halving; BFGS when the Hessian is singular.
/// Throws EstimationError(kNoFiniteWeights) when the target lies outside
/// the interior of the convex hull of the sample.
WeightSolution estimate_weights(const Eigen::MatrixXd& centered, const WeightOptions& options = {});

/// (sum w)^2 / sum w^2.
double ess(const ObservationWeights& weights);
double ess(std::span<const double> weights);

/// Weighted mean observed time in one arm (diagnostic only).
double weighted_mean_outcome(const IpdTrial& ipd, const ObservationWeights& weights, int arm);

/// Weighted covariate means over both arms, for balance tables.
Covariates weighted_covariate_means(const IpdTrial& ipd, const ObservationWeights& weights);

struct VarianceMethod {
  enum class Kind { kSandwich, kBootstrap };
  Kind kind = Kind::kSandwich;
  int resamples = 1000;

  static VarianceMethod sandwich() { return {}; }
  static VarianceMethod bootstrap(int b) { return {Kind::kBootstrap, b}; }
};

struct MaicResult {
  EstimateWithSE effect;  // marginal A vs C log HR in the comparator population
  WeightSolution weights;
  CoxFit fit;
  std::size_t bootstrap_failures = 0;
};

/// Balances the effect modifiers only (both arms together), then fits a
/// weighted treatment-only Cox model. SE from the robust sandwich or from
/// B whole-trial resamples with weights re-estimated in each.
/// The rng is only used for the bootstrap.
MaicResult maic_estimate(const IpdTrial& ipd, const AldSummary& targets,
                         const std::vector<std::size_t>& effect_modifiers,
                         const VarianceMethod& variance = VarianceMethod::sandwich(),
                         std::optional<RandomStream> rng = std::nullopt);

}  // namespace popadj
