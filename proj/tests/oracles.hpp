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

// Brute-force reference computations used only by the tests. Nothing here
// shares code with the library paths it checks.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "popadj/coxmodel.hpp"
#include "popadj/rng.hpp"

namespace popadj::testing {

/// O(n^2) weighted Breslow log partial likelihood straight from the
/// definition: every subject with t_j >= t_i is at risk at t_i.
inline double brute_force_loglik(const CoxData& d, const std::vector<double>& w,
                                 const Eigen::VectorXd& beta) {
  const Eigen::Index n = d.time.size();
  double ll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d.event[i] == 0) continue;
    const double wi = w.empty() ? 1.0 : w[static_cast<std::size_t>(i)];
    double denom = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (d.time[j] >= d.time[i])
        denom += (w.empty() ? 1.0 : w[static_cast<std::size_t>(j)]) * std::exp(d.x.row(j).dot(beta));
    ll += wi * (d.x.row(i).dot(beta) - std::log(denom));
  }
  return ll;
}

/// Central finite-difference gradient.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& at, double h = 1e-5) {
  Eigen::VectorXd g(at.size());
  for (Eigen::Index k = 0; k < at.size(); ++k) {
    Eigen::VectorXd up = at, down = at;
    up[k] += h;
    down[k] -= h;
    g[k] = (f(up) - f(down)) / (2 * h);
  }
  return g;
}

/// O(n^2) counting-process score residual for subject i:
/// d_i (x_i - xbar(t_i)) - sum_{events k: t_k <= t_i} w_k e^{eta_i} (x_i - xbar(t_k)) / S0(t_k).
inline Eigen::MatrixXd brute_force_residuals(const CoxData& d, const std::vector<double>& w,
                                             const Eigen::VectorXd& beta) {
  const Eigen::Index n = d.time.size();
  const Eigen::Index p = d.x.cols();
  auto wt = [&](Eigen::Index i) { return w.empty() ? 1.0 : w[static_cast<std::size_t>(i)]; };
  auto at_risk = [&](double t, double& s0, Eigen::VectorXd& s1) {
    s0 = 0.0;
    s1 = Eigen::VectorXd::Zero(p);
    for (Eigen::Index j = 0; j < n; ++j)
      if (d.time[j] >= t) {
        const double r = wt(j) * std::exp(d.x.row(j).dot(beta));
        s0 += r;
        s1 += r * d.x.row(j).transpose();
      }
  };
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd xi = d.x.row(i).transpose();
    double s0;
    Eigen::VectorXd s1;
    if (d.event[i] == 1) {
      at_risk(d.time[i], s0, s1);
      u.row(i) += (xi - s1 / s0).transpose();
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      if (d.event[k] == 0 || d.time[k] > d.time[i]) continue;
      at_risk(d.time[k], s0, s1);
      u.row(i) -= (wt(k) * std::exp(d.x.row(i).dot(beta)) * (xi - s1 / s0) / s0).transpose();
    }
  }
  return u;
}

/// Random right-censored data with continuous regressors.
inline CoxData random_cox_data(RandomStream& rng, int n, int p, double censor_prob = 0.3) {
  CoxData d;
  d.time.resize(n);
  d.event.resize(n);
  d.x.resize(n, p);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < p; ++k) d.x(i, k) = rng.normal();
    d.time[i] = -std::log(rng.uniform_open()) * std::exp(-0.5 * d.x(i, 0));
    d.event[i] = rng.uniform_open() < censor_prob ? 0 : 1;
  }
  d.event[0] = 1;
  return d;
}

}  // namespace popadj::testing
