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

#include "popadj/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <boost/math/tools/roots.hpp>

#include "popadj/coxmodel.hpp"
#include "popadj/errors.hpp"

namespace popadj {

CovariateSpec CovariateSpec::uniform(double mean, double sd, double correlation) {
  CovariateSpec spec;
  spec.mean.fill(mean);
  spec.sd.fill(sd);
  spec.correlation = correlation;
  return spec;
}

namespace {

Eigen::MatrixXd covariance(const CovariateSpec& spec) {
  constexpr auto k = static_cast<Eigen::Index>(kNumCovariates);
  Eigen::MatrixXd cov(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      cov(i, j) = spec.sd[static_cast<std::size_t>(i)] * spec.sd[static_cast<std::size_t>(j)] *
                  (i == j ? 1.0 : spec.correlation);
  return cov;
}

}  // namespace

void CovariateSpec::validate() const {
  for (std::size_t k = 0; k < kNumCovariates; ++k) {
    if (!std::isfinite(mean[k])) throw ConfigError("covariate mean must be finite");
    if (!std::isfinite(sd[k]) || sd[k] <= 0.0)
      throw ConfigError("covariate sd must be positive, got " + std::to_string(sd[k]));
  }
  if (!std::isfinite(correlation) || correlation <= -1.0 || correlation >= 1.0)
    throw ConfigError("pairwise correlation must lie in (-1, 1)");
  // Exchangeable correlation is positive definite iff
  // -1/(k-1) < rho < 1.
  if (correlation <= -1.0 / static_cast<double>(kNumCovariates - 1))
    throw ConfigError("correlation matrix is not positive definite");
  std::set<std::size_t> seen;
  for (std::size_t em : effect_modifiers) {
    if (em >= kNumCovariates) throw ConfigError("effect modifier index out of range");
    if (!seen.insert(em).second) throw ConfigError("duplicate effect modifier index");
  }
}

void OutcomeModelParams::validate(const CovariateSpec& spec) const {
  if (!(weibull_inverse_scale > 0.0) || !std::isfinite(weibull_inverse_scale))
    throw ConfigError("Weibull inverse scale must be positive");
  if (!(weibull_shape > 0.0) || !std::isfinite(weibull_shape))
    throw ConfigError("Weibull shape must be positive");
  if (!(censoring_rate > 0.0) || !std::isfinite(censoring_rate))
    throw ConfigError("censoring rate must be positive");
  if (interaction_coefs.size() != spec.effect_modifiers.size())
    throw ConfigError("one interaction coefficient is required per effect modifier");
  for (double b : prognostic_coefs)
    if (!std::isfinite(b)) throw ConfigError("prognostic coefficients must be finite");
  for (double b : interaction_coefs)
    if (!std::isfinite(b)) throw ConfigError("interaction coefficients must be finite");
  if (!std::isfinite(treatment_coef)) throw ConfigError("treatment coefficient must be finite");
}

std::size_t IpdTrial::arm_size(int treatment) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [&](const IpdRecord& r) { return r.treatment == treatment; }));
}

std::size_t IpdTrial::events(int treatment) const noexcept {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [&](const IpdRecord& r) {
    return r.treatment == treatment && r.event == 1;
  }));
}

void IpdTrial::validate() const {
  if (records.empty()) throw ConfigError("trial has no records");
  for (const IpdRecord& r : records) {
    if (!(r.time > 0.0) || !std::isfinite(r.time)) throw ConfigError("record time must be positive");
    if (r.event != 0 && r.event != 1) throw ConfigError("event indicator must be 0 or 1");
    if (r.treatment != 0 && r.treatment != 1) throw ConfigError("treatment must be 0 or 1");
    for (double v : r.x)
      if (!std::isfinite(v)) throw ConfigError("covariates must be finite");
  }
  if (arm_size(0) == 0 || arm_size(1) == 0) throw ConfigError("trial must contain both arms");
}

std::vector<Covariates> sample_covariates(const CovariateSpec& spec, std::size_t n,
                                          RandomStream& rng) {
  spec.validate();
  if (n == 0) throw ConfigError("sample size must be at least 1");
  Eigen::LLT<Eigen::MatrixXd> llt(covariance(spec));
  if (llt.info() != Eigen::Success) throw ConfigError("covariance matrix is not positive definite");
  const Eigen::MatrixXd chol = llt.matrixL();

  std::vector<Covariates> out(n);
  Eigen::VectorXd z(static_cast<Eigen::Index>(kNumCovariates));
  for (Covariates& row : out) {
    for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = rng.normal();
    const Eigen::VectorXd v = chol * z;
    for (std::size_t k = 0; k < kNumCovariates; ++k)
      row[k] = spec.mean[k] + v[static_cast<Eigen::Index>(k)];
  }
  return out;
}

double linear_predictor(const Covariates& x, int treatment, const OutcomeModelParams& params,
                        const std::vector<std::size_t>& effect_modifiers) {
  double lp = 0.0;
  for (std::size_t k = 0; k < kNumCovariates; ++k) lp += x[k] * params.prognostic_coefs[k];
  if (treatment == 1) {
    double effect = params.treatment_coef;
    for (std::size_t m = 0; m < effect_modifiers.size(); ++m)
      effect += x[effect_modifiers[m]] * params.interaction_coefs[m];
    lp += effect;
  }
  return lp;
}

double survival_time(double u, double lp, const OutcomeModelParams& params) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("survival_time: u must lie in (0, 1)");
  return std::pow(-std::log(u) / (params.weibull_inverse_scale * std::exp(lp)),
                  1.0 / params.weibull_shape);
}

double survival_time(double u, const Covariates& x, int treatment,
                     const OutcomeModelParams& params,
                     const std::vector<std::size_t>& effect_modifiers) {
  return survival_time(u, linear_predictor(x, treatment, params, effect_modifiers), params);
}

double censoring_time(double u, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw DomainError("censoring_time: rate must be positive");
  if (!(u > 0.0 && u < 1.0)) throw DomainError("censoring_time: u must lie in (0, 1)");
  return -std::log(u) / rate;
}

double calibrate_censoring_rate(double target_rate, const OutcomeModelParams& params,
                                std::size_t n_probe, RandomStream& rng) {
  if (!(target_rate > 0.0 && target_rate < 1.0))
    throw ConfigError("target censoring rate must lie in (0, 1)");
  if (n_probe < 2) throw ConfigError("calibration needs at least two probe subjects");

  // Subject i is censored iff E_i / rate < T_i, i.e. rate > E_i / T_i, with
  // E_i a unit exponential. The censored proportion at any rate is then the
  // empirical CDF of these ratios.
  const double lp = params.treatment_coef;  // active arm, covariates zero
  std::vector<double> ratio(n_probe);
  for (double& r : ratio) {
    const double t = survival_time(rng.uniform_open(), lp, params);
    const double e = -std::log(rng.uniform_open());
    r = e / t;
  }
  std::sort(ratio.begin(), ratio.end());
  const auto censored_fraction = [&](double rate) {
    const auto below = std::lower_bound(ratio.begin(), ratio.end(), rate) - ratio.begin();
    return static_cast<double>(below) / static_cast<double>(n_probe);
  };
  const auto objective = [&](double rate) { return censored_fraction(rate) - target_rate; };

  const double lo = 1e-9;
  const double hi = 1e6;
  if (objective(lo) > 0.0 || objective(hi) < 0.0)
    throw CalibrationError("censoring calibration: bracket [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "] does not contain the target rate");

  std::uintmax_t max_iter = 500;
  const auto tol = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); };
  const auto [a, b] = boost::math::tools::toms748_solve(objective, lo, hi, tol, max_iter);
  if (max_iter >= 500) throw CalibrationError("censoring calibration did not converge");
  return 0.5 * (a + b);
}

IpdTrial generate_trial(const CovariateSpec& spec, const OutcomeModelParams& params,
                        std::size_t n, RandomStream& rng) {
  spec.validate();
  params.validate(spec);
  if (n < 2 || n % 2 != 0) throw ConfigError("trial size must be a positive even number");

  const std::vector<Covariates> x = sample_covariates(spec, n, rng);
  IpdTrial trial;
  trial.records.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    IpdRecord& r = trial.records[i];
    r.x = x[i];
    r.treatment = i < n / 2 ? 1 : 0;
    const double t_event =
        survival_time(rng.uniform_open(), r.x, r.treatment, params, spec.effect_modifiers);
    const double t_cens = censoring_time(rng.uniform_open(), params.censoring_rate);
    r.time = std::min(t_event, t_cens);
    r.event = t_event <= t_cens ? 1 : 0;
  }
  return trial;
}

CoxData treatment_only_cox_data(const IpdTrial& trial) {
  const auto n = static_cast<Eigen::Index>(trial.size());
  CoxData data;
  data.time.resize(n);
  data.event.resize(n);
  data.x.resize(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const IpdRecord& r = trial.records[static_cast<std::size_t>(i)];
    data.time[i] = r.time;
    data.event[i] = r.event;
    data.x(i, 0) = r.treatment;
  }
  return data;
}

AldSummary aggregate_trial(const IpdTrial& trial) {
  trial.validate();
  Covariates means{};
  for (const IpdRecord& r : trial.records)
    for (std::size_t k = 0; k < kNumCovariates; ++k) means[k] += r.x[k];
  for (double& m : means) m /= static_cast<double>(trial.size());

  const CoxFit fit = fit_cox(treatment_only_cox_data(trial));
  return {means, EstimateWithSE(fit.coefs[0], fit.model_se(0))};
}

}  // namespace popadj
