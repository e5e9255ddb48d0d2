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

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "popadj/coxmodel.hpp"
#include "popadj/estimate.hpp"
#include "popadj/rng.hpp"

namespace popadj {

inline constexpr std::size_t kNumCovariates = 4;
using Covariates = std::array<double, kNumCovariates>;

/// Marginal normal covariates with an exchangeable correlation.
struct CovariateSpec {
  Covariates mean{};
  Covariates sd{0.2, 0.2, 0.2, 0.2};
  double correlation = 0.0;
  /// Indices (0-based) of the covariates that modify the treatment effect.
  /// Effect modifiers are also prognostic.
  std::vector<std::size_t> effect_modifiers{0, 1};

  /// Same mean and sd for every covariate.
  static CovariateSpec uniform(double mean, double sd, double correlation);

  /// Throws ConfigError unless sd > 0 everywhere, the correlation matrix is
  /// positive definite and the effect-modifier indices are valid and unique.
  void validate() const;
};

/// Weibull proportional hazards outcome model with exponential censoring.
/// Cumulative hazard H(t | x, T) = lambda * exp(LP) * t^nu with
/// LP = x * prognostic + (treatment + x_EM * interaction) * 1(T = 1).
struct OutcomeModelParams {
  double weibull_inverse_scale = 8.5;
  double weibull_shape = 1.3;
  Covariates prognostic_coefs{};
  std::vector<double> interaction_coefs{0.0, 0.0};
  double treatment_coef = 0.0;
  double censoring_rate = 0.96;

  void validate(const CovariateSpec& spec) const;
};

struct IpdRecord {
  Covariates x{};
  int treatment = 0;  // 1 = active, 0 = common comparator
  double time = 0.0;
  int event = 0;  // 1 = event observed, 0 = censored
};

struct IpdTrial {
  std::vector<IpdRecord> records;

  std::size_t size() const noexcept { return records.size(); }
  std::size_t arm_size(int treatment) const noexcept;
  std::size_t events(int treatment) const noexcept;

  /// Nonempty, both arms present, times positive, indicators binary.
  void validate() const;
};

/// Published-style summaries of a trial: covariate means plus a marginal
/// active-vs-comparator log hazard ratio. Missing means are NaN.
struct AldSummary {
  Covariates covariate_means{};
  EstimateWithSE effect{0.0, 1.0};
};

/// n draws of the covariate vector (multivariate normal via Cholesky of the
/// exchangeable correlation matrix).
std::vector<Covariates> sample_covariates(const CovariateSpec& spec, std::size_t n,
                                          RandomStream& rng);

double linear_predictor(const Covariates& x, int treatment, const OutcomeModelParams& params,
                        const std::vector<std::size_t>& effect_modifiers);

/// Inverse-transform Weibull PH time: (-log u / (lambda exp(LP)))^(1/nu).
/// Throws DomainError unless 0 < u < 1.
double survival_time(double u, double linear_predictor, const OutcomeModelParams& params);
double survival_time(double u, const Covariates& x, int treatment,
                     const OutcomeModelParams& params,
                     const std::vector<std::size_t>& effect_modifiers);

/// Exponential inverse transform -log(u) / rate.
double censoring_time(double u, double rate);

/// Censoring rate giving the target censored proportion under active
/// treatment with all covariates at zero, estimated from n_probe simulated
/// subjects with a bracketing root finder.
double calibrate_censoring_rate(double target_rate, const OutcomeModelParams& params,
                                std::size_t n_probe, RandomStream& rng);

/// Simulated 1:1 trial: first n/2 subjects active, the rest comparator.
IpdTrial generate_trial(const CovariateSpec& spec, const OutcomeModelParams& params,
                        std::size_t n, RandomStream& rng);

/// Survival data with the treatment indicator as the only regressor.
CoxData treatment_only_cox_data(const IpdTrial& trial);

/// Column means plus an unadjusted treatment-only Cox fit (model SE).
AldSummary aggregate_trial(const IpdTrial& trial);

}  // namespace popadj
