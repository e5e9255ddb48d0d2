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
#include <span>
#include <vector>

#include <Eigen/Core>

namespace popadj {

/// Non-negative per-observation weights, at least one strictly positive.
class ObservationWeights {
 public:
  ObservationWeights() = default;
  explicit ObservationWeights(std::vector<double> weights);

  /// n unit weights.
  static ObservationWeights unit(std::size_t n);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  double sum() const noexcept;

 private:
  std::vector<double> values_;
};

/// Right-censored survival data with a design matrix of regressors.
struct CoxData {
  Eigen::VectorXd time;
  Eigen::VectorXi event;
  Eigen::MatrixXd x;  // n x p

  std::size_t size() const noexcept { return static_cast<std::size_t>(time.size()); }
  std::size_t n_regressors() const noexcept { return static_cast<std::size_t>(x.cols()); }
};

struct CoxOptions {
  double score_tol = 1e-9;
  // The score test also needs the pending Newton step below this.
  double newton_step_tol = 1e-4;
  // Smallest information eigenvalue below this fraction of its value at
  // beta = 0 is treated as a monotone likelihood.
  double information_collapse = 1e-8;
  double step_tol = 1e-10;
  int max_iter = 100;
  // |beta| beyond this is treated as a monotone likelihood.
  double separation_bound = 15.0;
  int max_halvings = 10;
};

struct CoxFit {
  Eigen::VectorXd coefs;
  Eigen::MatrixXd model_vcov;   // inverse observed information
  Eigen::MatrixXd robust_vcov;  // sandwich, weights treated as fixed
  double loglik = 0.0;
  std::size_t n_events = 0;
  bool converged = false;
  int n_iter = 0;

  double model_se(std::size_t j) const;
  double robust_se(std::size_t j) const;
};

struct ScoreInformation {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd information;
};

/// Weighted Breslow log partial likelihood
///   sum_i d_i w_i [ eta_i - log sum_{j: t_j >= t_i} w_j exp(eta_j) ].
/// An empty weight span means unit weights.
double log_partial_likelihood(const CoxData& data, std::span<const double> weights,
                              const Eigen::VectorXd& beta);

/// Analytic gradient and negative Hessian of the weighted log partial
/// likelihood at beta.
ScoreInformation score_and_information(const CoxData& data,
                                       std::span<const double> weights,
                                       const Eigen::VectorXd& beta);

/// Counting-process score residuals (n x p). With weights w,
/// sum_i w_i U_i equals the total score at any beta.
Eigen::MatrixXd score_residuals(const CoxData& data, std::span<const double> weights,
                                const Eigen::VectorXd& beta);

/// Newton-Raphson with step-halving. Throws EstimationError on no events,
/// rank deficiency, separation or non-convergence.
CoxFit fit_cox(const CoxData& data, const CoxOptions& options = {});
CoxFit fit_cox(const CoxData& data, const ObservationWeights& weights,
               const CoxOptions& options = {});

}  // namespace popadj
