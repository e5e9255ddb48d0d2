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

#include "popadj/maic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "popadj/errors.hpp"

namespace popadj {

Eigen::MatrixXd center_effect_modifiers(const IpdTrial& ipd, const AldSummary& targets,
                                        const std::vector<std::size_t>& effect_modifiers) {
  if (effect_modifiers.empty()) throw ConfigError("at least one effect modifier is required");
  for (std::size_t em : effect_modifiers) {
    if (em >= kNumCovariates) throw ConfigError("effect modifier index out of range");
    if (!std::isfinite(targets.covariate_means[em]))
      throw ConfigError("no target mean for effect modifier x" + std::to_string(em + 1));
  }
  const auto n = static_cast<Eigen::Index>(ipd.size());
  const auto k = static_cast<Eigen::Index>(effect_modifiers.size());
  Eigen::MatrixXd out(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      const std::size_t em = effect_modifiers[static_cast<std::size_t>(j)];
      out(i, j) = ipd.records[static_cast<std::size_t>(i)].x[em] - targets.covariate_means[em];
    }
  return out;
}

namespace {

// Q and its derivatives with the largest exponent factored out:
// Q = exp(shift) * q, grad = exp(shift) * g, hess = exp(shift) * h.
struct Objective {
  double shift = 0.0;
  double q = 0.0;
  Eigen::VectorXd g;
  Eigen::MatrixXd h;

  double log_q() const { return shift + std::log(q); }
  Eigen::VectorXd balance() const { return g / q; }  // weighted mean of centered EMs
  double max_abs_grad() const { return std::exp(shift) * g.cwiseAbs().maxCoeff(); }
};

Objective evaluate(const Eigen::MatrixXd& x, const Eigen::VectorXd& alpha, bool hessian) {
  const Eigen::VectorXd s = x * alpha;
  Objective obj;
  obj.shift = s.maxCoeff();
  const Eigen::VectorXd e = (s.array() - obj.shift).exp().matrix();
  obj.q = e.sum();
  obj.g = x.transpose() * e;
  if (hessian) obj.h = x.transpose() * e.asDiagonal() * x;
  return obj;
}

bool converged(const Objective& obj, const WeightOptions& opt) {
  return obj.balance().cwiseAbs().maxCoeff() <= opt.balance_tol &&
         obj.max_abs_grad() <= opt.grad_tol;
}

[[noreturn]] void no_finite_solution(const Eigen::VectorXd& alpha);

// At a finite minimizer the weighted mean of x_i alpha is zero, so some
// x_i alpha >= 0 and Q >= 1. Descent never goes below the minimum, hence
// Q < 1 certifies that the target is outside the hull.
void check_bounded(const Eigen::MatrixXd& x, const Eigen::VectorXd& alpha, const Objective& obj,
                   const WeightOptions& opt) {
  if (obj.log_q() < -1e-12 || alpha.cwiseAbs().maxCoeff() > opt.alpha_bound ||
      (x * alpha).cwiseAbs().maxCoeff() > opt.log_weight_bound)
    no_finite_solution(alpha);
}

[[noreturn]] void no_finite_solution(const Eigen::VectorXd& alpha) {
  throw EstimationError(EstimationError::Kind::kNoFiniteWeights,
                        "no finite solution: target outside covariate support (|alpha| = " +
                            std::to_string(alpha.cwiseAbs().maxCoeff()) + ")");
}

// Tracks whether the balance error keeps improving.
struct StallGuard {
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;

  bool stalled(const Objective& obj, int limit) {
    const double err = obj.balance().norm();
    if (err < best) {
      best = err;
      since_best = 0;
      return false;
    }
    return ++since_best >= limit;
  }
};

double min_covariance_eigenvalue(const Eigen::MatrixXd& x, const Eigen::VectorXd& w) {
  const double total = w.sum();
  const Eigen::VectorXd mean = x.transpose() * w / total;
  const Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * w.asDiagonal() * centered / total;
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov, Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

WeightSolution finish(const Eigen::MatrixXd& x, Eigen::VectorXd alpha, int iterations) {
  const Eigen::VectorXd w = (x * alpha).array().exp().matrix();
  // A target on the boundary of the support is approached by weights that
  // pile onto a face of the hull: balance looks fine but the weighted
  // covariance collapses along the face normal.
  const double unweighted = min_covariance_eigenvalue(x, Eigen::VectorXd::Ones(x.rows()));
  if (min_covariance_eigenvalue(x, w) < 1e-8 * unweighted) no_finite_solution(alpha);
  WeightSolution sol;
  sol.alpha1 = std::move(alpha);
  sol.weights = ObservationWeights(std::vector<double>(w.data(), w.data() + w.size()));
  sol.ess = ess(sol.weights);
  sol.objective_value = sol.weights.sum();
  sol.iterations = iterations;
  return sol;
}

// BFGS on log Q (same minimizer, scale-free) with Armijo backtracking.
WeightSolution bfgs(const Eigen::MatrixXd& x, Eigen::VectorXd alpha, int iter,
                    const WeightOptions& opt) {
  const Eigen::Index k = x.cols();
  Eigen::MatrixXd inv_h = Eigen::MatrixXd::Identity(k, k);
  Objective obj = evaluate(x, alpha, false);
  Eigen::VectorXd grad = obj.balance();
  StallGuard guard;
  for (; iter < opt.max_iter; ++iter) {
    if (converged(obj, opt)) return finish(x, std::move(alpha), iter);
    if (guard.stalled(obj, opt.stall_limit)) no_finite_solution(alpha);
    const Eigen::VectorXd dir = -inv_h * grad;
    const double slope = grad.dot(dir);
    double t = 1.0;
    Eigen::VectorXd next_alpha;
    Objective next;
    int halvings = 0;
    for (;;) {
      next_alpha = alpha + t * dir;
      next = evaluate(x, next_alpha, false);
      if (next.log_q() <= obj.log_q() + 1e-4 * t * slope + 1e-14 * std::abs(obj.log_q())) break;
      if (++halvings > 60) no_finite_solution(alpha);
      t *= 0.5;
    }
    check_bounded(x, next_alpha, next, opt);
    const Eigen::VectorXd next_grad = next.balance();
    const Eigen::VectorXd s = next_alpha - alpha;
    const Eigen::VectorXd y = next_grad - grad;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(k, k);
      inv_h = (id - rho * s * y.transpose()) * inv_h * (id - rho * y * s.transpose()) +
              rho * s * s.transpose();
    }
    alpha = std::move(next_alpha);
    obj = std::move(next);
    grad = next_grad;
  }
  if (converged(obj, opt)) return finish(x, std::move(alpha), iter);
  throw EstimationError(EstimationError::Kind::kWeightNonConvergence,
                        "weight estimation did not converge in " + std::to_string(opt.max_iter) +
                            " iterations");
}

}  // namespace

WeightSolution estimate_weights(const Eigen::MatrixXd& centered, const WeightOptions& opt) {
  if (centered.rows() == 0 || centered.cols() == 0)
    throw ConfigError("weight estimation needs a nonempty effect-modifier matrix");
  if (!centered.allFinite()) throw ConfigError("effect-modifier matrix must be finite");

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(centered.cols());
  Objective obj = evaluate(centered, alpha, true);
  StallGuard guard;
  int iter = 0;
  for (; iter < opt.max_iter; ++iter) {
    if (converged(obj, opt)) return finish(centered, std::move(alpha), iter);
    if (guard.stalled(obj, opt.stall_limit)) no_finite_solution(alpha);

    Eigen::LLT<Eigen::MatrixXd> llt(obj.h);
    if (llt.info() != Eigen::Success) return bfgs(centered, std::move(alpha), iter, opt);
    Eigen::VectorXd step = -llt.solve(obj.g);
    if (!step.allFinite()) return bfgs(centered, std::move(alpha), iter, opt);

    Eigen::VectorXd next_alpha;
    Objective next;
    int halvings = 0;
    for (;;) {
      next_alpha = alpha + step;
      next = evaluate(centered, next_alpha, true);
      if (next.log_q() <= obj.log_q() + 1e-14 * std::abs(obj.log_q())) break;
      if (++halvings > 60) no_finite_solution(alpha);
      step *= 0.5;
    }
    check_bounded(centered, next_alpha, next, opt);
    alpha = std::move(next_alpha);
    obj = std::move(next);
  }
  if (converged(obj, opt)) return finish(centered, std::move(alpha), iter);
  throw EstimationError(EstimationError::Kind::kWeightNonConvergence,
                        "weight estimation did not converge in " + std::to_string(opt.max_iter) +
                            " iterations");
}

double ess(std::span<const double> weights) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double w : weights) {
    sum += w;
    sum_sq += w * w;
  }
  if (!(sum_sq > 0.0)) throw DomainError("ESS undefined: all weights are zero");
  return sum * sum / sum_sq;
}

double ess(const ObservationWeights& weights) { return ess(weights.values()); }

double weighted_mean_outcome(const IpdTrial& ipd, const ObservationWeights& weights, int arm) {
  if (weights.size() != ipd.size()) throw ConfigError("weights do not match the IPD");
  double num = 0.0;
  double den = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < ipd.size(); ++i) {
    const IpdRecord& r = ipd.records[i];
    if (r.treatment != arm) continue;
    ++count;
    num += r.time * weights[i];
    den += weights[i];
  }
  if (count == 0) throw DomainError("weighted mean outcome: arm has no subjects");
  if (!(den > 0.0)) throw DomainError("weighted mean outcome: arm weights sum to zero");
  return num / den;
}

Covariates weighted_covariate_means(const IpdTrial& ipd, const ObservationWeights& weights) {
  if (weights.size() != ipd.size()) throw ConfigError("weights do not match the IPD");
  Covariates out{};
  double den = 0.0;
  for (std::size_t i = 0; i < ipd.size(); ++i) {
    for (std::size_t k = 0; k < kNumCovariates; ++k) out[k] += weights[i] * ipd.records[i].x[k];
    den += weights[i];
  }
  for (double& v : out) v /= den;
  return out;
}

namespace {

struct WeightedFit {
  WeightSolution weights;
  CoxFit fit;
};

WeightedFit weighted_fit(const IpdTrial& ipd, const AldSummary& targets,
                         const std::vector<std::size_t>& effect_modifiers) {
  WeightSolution sol = estimate_weights(center_effect_modifiers(ipd, targets, effect_modifiers));
  CoxFit fit = fit_cox(treatment_only_cox_data(ipd), sol.weights);
  return {std::move(sol), std::move(fit)};
}

}  // namespace

MaicResult maic_estimate(const IpdTrial& ipd, const AldSummary& targets,
                         const std::vector<std::size_t>& effect_modifiers,
                         const VarianceMethod& variance, std::optional<RandomStream> rng) {
  ipd.validate();
  WeightedFit main = weighted_fit(ipd, targets, effect_modifiers);
  const double beta = main.fit.coefs[0];

  if (variance.kind == VarianceMethod::Kind::kSandwich) {
    EstimateWithSE effect(beta, main.fit.robust_se(0));
    return {effect, std::move(main.weights), std::move(main.fit), 0};
  }

  if (variance.resamples < 2) throw ConfigError("bootstrap needs at least two resamples");
  if (!rng) throw ConfigError("bootstrap variance requires a random stream");
  const RandomStream base = *rng;
  const auto n_boot = static_cast<std::size_t>(variance.resamples);
  const std::size_t n = ipd.size();
  std::vector<double> draws(n_boot, std::numeric_limits<double>::quiet_NaN());

#pragma omp parallel for schedule(dynamic) if (!omp_in_parallel())
  for (std::size_t b = 0; b < n_boot; ++b) {
    RandomStream stream = base.split(b);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    IpdTrial resample;
    resample.records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) resample.records.push_back(ipd.records[pick(stream)]);
    if (resample.arm_size(0) == 0 || resample.arm_size(1) == 0) continue;
    try {
      draws[b] = weighted_fit(resample, targets, effect_modifiers).fit.coefs[0];
    } catch (const EstimationError&) {
    } catch (const DomainError&) {
    }
  }

  double sum = 0.0;
  std::size_t ok = 0;
  for (double d : draws)
    if (std::isfinite(d)) {
      sum += d;
      ++ok;
    }
  if (ok < 2)
    throw EstimationError(EstimationError::Kind::kNonConvergence,
                          "bootstrap: fewer than two successful resamples");
  const double mean = sum / static_cast<double>(ok);
  double ss = 0.0;
  for (double d : draws)
    if (std::isfinite(d)) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / static_cast<double>(ok - 1));
  return {EstimateWithSE(beta, sd), std::move(main.weights), std::move(main.fit), n_boot - ok};
}

}  // namespace popadj
