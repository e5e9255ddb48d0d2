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

#include "popadj/coxmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "popadj/errors.hpp"

namespace popadj {

ObservationWeights::ObservationWeights(std::vector<double> weights)
    : values_(std::move(weights)) {
  bool any_positive = false;
  for (double w : values_) {
    if (!std::isfinite(w) || w < 0.0)
      throw DomainError("observation weights must be finite and non-negative");
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) throw DomainError("at least one observation weight must be positive");
}

ObservationWeights ObservationWeights::unit(std::size_t n) {
  return ObservationWeights(std::vector<double>(n, 1.0));
}

double ObservationWeights::sum() const noexcept {
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

double CoxFit::model_se(std::size_t j) const {
  return std::sqrt(model_vcov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));
}

double CoxFit::robust_se(std::size_t j) const {
  return std::sqrt(robust_vcov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));
}

namespace {

// Data reordered by descending time with column-centered regressors.
// Centering shifts every linear predictor by the same constant within a
// risk set, so the partial likelihood and its derivatives are unchanged.
struct SortedProblem {
  std::vector<std::size_t> order;
  Eigen::MatrixXd x;
  std::vector<double> time;
  std::vector<double> weight;
  std::vector<int> event;
  std::size_t n_events = 0;
};

SortedProblem prepare(const CoxData& data, std::span<const double> weights) {
  const std::size_t n = data.size();
  if (static_cast<std::size_t>(data.event.size()) != n ||
      static_cast<std::size_t>(data.x.rows()) != n)
    throw ConfigError("cox data: time, event and design rows must have equal length");
  if (!weights.empty() && weights.size() != n)
    throw ConfigError("cox data: weight vector length does not match data");
  if (n == 0) throw EstimationError(EstimationError::Kind::kNoEvents, "cox fit: empty data");

  SortedProblem sp;
  sp.order.resize(n);
  std::iota(sp.order.begin(), sp.order.end(), std::size_t{0});
  std::stable_sort(sp.order.begin(), sp.order.end(), [&](std::size_t a, std::size_t b) {
    return data.time[static_cast<Eigen::Index>(a)] > data.time[static_cast<Eigen::Index>(b)];
  });

  const Eigen::Index p = data.x.cols();
  const Eigen::RowVectorXd means = data.x.colwise().mean();
  sp.x.resize(static_cast<Eigen::Index>(n), p);
  sp.time.resize(n);
  sp.weight.resize(n);
  sp.event.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto i = static_cast<Eigen::Index>(sp.order[r]);
    const double t = data.time[i];
    const int d = data.event[i];
    const double w = weights.empty() ? 1.0 : weights[sp.order[r]];
    if (!std::isfinite(t)) throw ConfigError("cox data: non-finite time");
    if (d != 0 && d != 1) throw ConfigError("cox data: event indicator must be 0 or 1");
    if (!std::isfinite(w) || w < 0.0) throw DomainError("cox data: invalid weight");
    sp.x.row(static_cast<Eigen::Index>(r)) = data.x.row(i) - means;
    sp.time[r] = t;
    sp.weight[r] = w;
    sp.event[r] = d;
    if (d == 1 && w > 0.0) ++sp.n_events;
  }
  if (!sp.x.allFinite()) throw ConfigError("cox data: non-finite regressor");
  return sp;
}

enum class Need { kLoglik, kScore, kInformation };

struct Evaluation {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd information;
};

// Single descending sweep accumulating the risk-set sums
// S0 = sum w e^eta, S1 = sum w e^eta x, S2 = sum w e^eta x x'.
// Tied times enter the risk set together before any of their events
// (Breslow).
Evaluation evaluate(const SortedProblem& sp, const Eigen::VectorXd& beta, Need need) {
  const std::size_t n = sp.time.size();
  const Eigen::Index p = sp.x.cols();
  const Eigen::VectorXd eta = sp.x * beta;
  const double shift = eta.maxCoeff();

  Evaluation ev;
  const bool want_score = need != Need::kLoglik;
  const bool want_info = need == Need::kInformation;
  if (want_score) ev.score = Eigen::VectorXd::Zero(p);
  if (want_info) ev.information = Eigen::MatrixXd::Zero(p, p);

  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);

  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    const double t = sp.time[i];
    for (; j < n && sp.time[j] == t; ++j) {
      const double r = sp.weight[j] * std::exp(eta[static_cast<Eigen::Index>(j)] - shift);
      s0 += r;
      if (want_score) s1.noalias() += r * sp.x.row(static_cast<Eigen::Index>(j)).transpose();
      if (want_info)
        s2.selfadjointView<Eigen::Lower>().rankUpdate(
            sp.x.row(static_cast<Eigen::Index>(j)).transpose(), r);
    }
    double dead_weight = 0.0;
    double log_s0 = 0.0;
    bool any = false;
    for (std::size_t k = i; k < j; ++k) {
      if (sp.event[k] == 0 || sp.weight[k] == 0.0) continue;
      if (!any) {
        log_s0 = std::log(s0);
        any = true;
      }
      const double w = sp.weight[k];
      ev.loglik += w * (eta[static_cast<Eigen::Index>(k)] - shift - log_s0);
      dead_weight += w;
      if (want_score) ev.score.noalias() += w * sp.x.row(static_cast<Eigen::Index>(k)).transpose();
    }
    if (any && want_score) {
      const Eigen::VectorXd xbar = s1 / s0;
      ev.score.noalias() -= dead_weight * xbar;
      if (want_info) {
        Eigen::MatrixXd s2_full = s2.selfadjointView<Eigen::Lower>();
        ev.information.noalias() += dead_weight * (s2_full / s0 - xbar * xbar.transpose());
      }
    }
    i = j;
  }
  return ev;
}

Eigen::MatrixXd residuals_sorted(const SortedProblem& sp, const Eigen::VectorXd& beta) {
  const std::size_t n = sp.time.size();
  const Eigen::Index p = sp.x.cols();
  const Eigen::VectorXd eta = sp.x * beta;
  const double shift = eta.maxCoeff();

  // Descending sweep: per tie group, the risk-set mean and the Breslow
  // hazard increment.
  struct Group {
    std::size_t begin, end;
    Eigen::VectorXd xbar;
    double dhaz;
  };
  std::vector<Group> groups;
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    const double t = sp.time[i];
    for (; j < n && sp.time[j] == t; ++j) {
      const double r = sp.weight[j] * std::exp(eta[static_cast<Eigen::Index>(j)] - shift);
      s0 += r;
      s1.noalias() += r * sp.x.row(static_cast<Eigen::Index>(j)).transpose();
    }
    double dead_weight = 0.0;
    for (std::size_t k = i; k < j; ++k)
      if (sp.event[k] == 1) dead_weight += sp.weight[k];
    groups.push_back({i, j, s1 / s0, dead_weight > 0.0 ? dead_weight / s0 : 0.0});
    i = j;
  }

  // Ascending sweep: cumulative hazard H(t) and sum of dH * xbar up to t.
  Eigen::MatrixXd u(static_cast<Eigen::Index>(n), p);
  double cum_haz = 0.0;
  Eigen::VectorXd cum_hx = Eigen::VectorXd::Zero(p);
  for (auto g = groups.rbegin(); g != groups.rend(); ++g) {
    cum_haz += g->dhaz;
    cum_hx.noalias() += g->dhaz * g->xbar;
    for (std::size_t k = g->begin; k < g->end; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const Eigen::VectorXd xk = sp.x.row(kk).transpose();
      Eigen::VectorXd uk = -std::exp(eta[kk] - shift) * (xk * cum_haz - cum_hx);
      if (sp.event[k] == 1) uk += xk - g->xbar;
      u.row(kk) = uk.transpose();
    }
  }
  return u;
}

Eigen::MatrixXd unsort_rows(const SortedProblem& sp, const Eigen::MatrixXd& sorted) {
  Eigen::MatrixXd out(sorted.rows(), sorted.cols());
  for (std::size_t r = 0; r < sp.order.size(); ++r)
    out.row(static_cast<Eigen::Index>(sp.order[r])) = sorted.row(static_cast<Eigen::Index>(r));
  return out;
}

void check_beta(const SortedProblem& sp, const Eigen::VectorXd& beta) {
  if (beta.size() != sp.x.cols())
    throw ConfigError("coefficient vector length does not match design columns");
}

std::string describe(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

}  // namespace

double log_partial_likelihood(const CoxData& data, std::span<const double> weights,
                              const Eigen::VectorXd& beta) {
  const SortedProblem sp = prepare(data, weights);
  check_beta(sp, beta);
  return evaluate(sp, beta, Need::kLoglik).loglik;
}

ScoreInformation score_and_information(const CoxData& data, std::span<const double> weights,
                                       const Eigen::VectorXd& beta) {
  const SortedProblem sp = prepare(data, weights);
  check_beta(sp, beta);
  Evaluation ev = evaluate(sp, beta, Need::kInformation);
  return {ev.loglik, std::move(ev.score), std::move(ev.information)};
}

Eigen::MatrixXd score_residuals(const CoxData& data, std::span<const double> weights,
                                const Eigen::VectorXd& beta) {
  const SortedProblem sp = prepare(data, weights);
  check_beta(sp, beta);
  return unsort_rows(sp, residuals_sorted(sp, beta));
}

namespace {

CoxFit fit_impl(const CoxData& data, std::span<const double> weights, const CoxOptions& opt) {
  using Kind = EstimationError::Kind;
  const SortedProblem sp = prepare(data, weights);
  const Eigen::Index p = sp.x.cols();
  if (p == 0) throw ConfigError("cox fit: design has no regressors");
  if (sp.n_events == 0) throw EstimationError(Kind::kNoEvents, "cox fit: no events");

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Evaluation ev = evaluate(sp, beta, Need::kInformation);

  const auto min_eigenvalue = [](const Eigen::MatrixXd& m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues();
  };
  const Eigen::VectorXd eig0 = min_eigenvalue(ev.information);
  const double info0_min = eig0.minCoeff();
  if (!(eig0.maxCoeff() > 0.0) || info0_min <= 1e-10 * eig0.maxCoeff())
    throw EstimationError(Kind::kRankDeficient, "cox fit: design is rank deficient on the risk sets");

  CoxFit fit;
  bool converged = false;
  int iter = 0;
  for (; iter < opt.max_iter; ++iter) {
    // Information draining away along some direction means the likelihood
    // is flattening out towards an infinite coefficient.
    if (iter > 0 && min_eigenvalue(ev.information).minCoeff() < opt.information_collapse * info0_min)
      throw EstimationError(Kind::kSeparation,
                            "cox fit: information vanished (monotone partial likelihood), beta = " +
                                describe(beta));
    Eigen::LDLT<Eigen::MatrixXd> ldlt(ev.information);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
      throw EstimationError(Kind::kNonConvergence,
                            "cox fit: information matrix lost positive definiteness at beta = " +
                                describe(beta));
    Eigen::VectorXd step = ldlt.solve(ev.score);
    // On a monotone likelihood the score and information both vanish while
    // the Newton step stays of order one, so a small score alone is not enough.
    if (ev.score.cwiseAbs().maxCoeff() < opt.score_tol &&
        step.cwiseAbs().maxCoeff() < opt.newton_step_tol) {
      converged = true;
      break;
    }

    Evaluation next;
    Eigen::VectorXd candidate;
    int halvings = 0;
    for (;;) {
      candidate = beta + step;
      next = evaluate(sp, candidate, Need::kInformation);
      if (std::isfinite(next.loglik) &&
          next.loglik >= ev.loglik - 1e-12 * (1.0 + std::abs(ev.loglik)))
        break;
      if (++halvings >= opt.max_halvings)
        throw EstimationError(Kind::kSeparation,
                              "cox fit: step-halving failed " + std::to_string(halvings) +
                                  " times at beta = " + describe(beta));
      step *= 0.5;
    }
    if (candidate.cwiseAbs().maxCoeff() > opt.separation_bound)
      throw EstimationError(Kind::kSeparation,
                            "cox fit: coefficients diverging (monotone partial likelihood), beta = " +
                                describe(candidate));
    const double max_step = (candidate - beta).cwiseAbs().maxCoeff();
    beta = std::move(candidate);
    ev = std::move(next);
    if (max_step < opt.step_tol) {
      converged = true;
      ++iter;
      break;
    }
  }
  if (!converged)
    throw EstimationError(Kind::kNonConvergence,
                          "cox fit: no convergence after " + std::to_string(opt.max_iter) +
                              " iterations, beta = " + describe(beta));

  Eigen::LDLT<Eigen::MatrixXd> ldlt(ev.information);
  const Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd u = residuals_sorted(sp, beta);
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    const Eigen::VectorXd wu = sp.weight[static_cast<std::size_t>(r)] * u.row(r).transpose();
    meat.noalias() += wu * wu.transpose();
  }

  fit.coefs = beta;
  fit.model_vcov = 0.5 * (inv + inv.transpose());
  const Eigen::MatrixXd sandwich = inv * meat * inv;
  fit.robust_vcov = 0.5 * (sandwich + sandwich.transpose());
  fit.loglik = ev.loglik;
  fit.n_events = sp.n_events;
  fit.converged = true;
  fit.n_iter = iter;
  return fit;
}

}  // namespace

CoxFit fit_cox(const CoxData& data, const CoxOptions& options) {
  return fit_impl(data, {}, options);
}

CoxFit fit_cox(const CoxData& data, const ObservationWeights& weights,
               const CoxOptions& options) {
  return fit_impl(data, weights.values(), options);
}

}  // namespace popadj
