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

#include "popadj/stc.hpp"

#include <cmath>
#include <string>

#include "popadj/errors.hpp"

namespace popadj {

void StcModelSpec::validate() const {
  for (std::size_t c : prognostic_columns)
    if (c >= kNumCovariates) throw ConfigError("STC prognostic column out of range");
  for (std::size_t c : effect_modifier_columns)
    if (c >= kNumCovariates) throw ConfigError("STC effect modifier column out of range");
}

std::size_t stc_treatment_column(const StcModelSpec& spec) { return spec.prognostic_columns.size(); }

CoxData stc_design(const IpdTrial& ipd, const StcModelSpec& spec,
                   const std::vector<double>& em_centers,
                   const std::vector<double>& prognostic_centers) {
  spec.validate();
  if (em_centers.size() != spec.effect_modifier_columns.size())
    throw ConfigError("one centering constant is required per effect modifier");
  if (!prognostic_centers.empty() && prognostic_centers.size() != spec.prognostic_columns.size())
    throw ConfigError("one centering constant is required per prognostic column");

  const auto n = static_cast<Eigen::Index>(ipd.size());
  const auto n_prog = static_cast<Eigen::Index>(spec.prognostic_columns.size());
  const auto n_em = static_cast<Eigen::Index>(spec.effect_modifier_columns.size());
  CoxData data;
  data.time.resize(n);
  data.event.resize(n);
  data.x.resize(n, n_prog + 1 + n_em);
  for (Eigen::Index i = 0; i < n; ++i) {
    const IpdRecord& r = ipd.records[static_cast<std::size_t>(i)];
    data.time[i] = r.time;
    data.event[i] = r.event;
    for (Eigen::Index j = 0; j < n_prog; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      const double c = prognostic_centers.empty() ? 0.0 : prognostic_centers[uj];
      data.x(i, j) = r.x[spec.prognostic_columns[uj]] - c;
    }
    data.x(i, n_prog) = r.treatment;
    for (Eigen::Index j = 0; j < n_em; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      data.x(i, n_prog + 1 + j) =
          r.treatment * (r.x[spec.effect_modifier_columns[uj]] - em_centers[uj]);
    }
  }
  return data;
}

StcResult stc_fit(const IpdTrial& ipd, const StcModelSpec& spec,
                  const std::vector<double>& em_centers) {
  ipd.validate();
  CoxFit fit = fit_cox(stc_design(ipd, spec, em_centers));
  const std::size_t t = stc_treatment_column(spec);
  EstimateWithSE effect(fit.coefs[static_cast<Eigen::Index>(t)], fit.model_se(t));
  return {effect, std::move(fit)};
}

StcResult stc_estimate(const IpdTrial& ipd, const AldSummary& targets, const StcModelSpec& spec) {
  spec.validate();
  std::vector<double> centers;
  for (std::size_t c : spec.effect_modifier_columns) {
    if (!std::isfinite(targets.covariate_means[c]))
      throw ConfigError("no target mean for effect modifier x" + std::to_string(c + 1));
    centers.push_back(targets.covariate_means[c]);
  }
  if (spec.center_effect_modifiers_only) return stc_fit(ipd, spec, centers);

  std::vector<double> prog_centers;
  for (std::size_t c : spec.prognostic_columns) {
    const double m = targets.covariate_means[c];
    prog_centers.push_back(std::isfinite(m) ? m : 0.0);
  }
  ipd.validate();
  CoxFit fit = fit_cox(stc_design(ipd, spec, centers, prog_centers));
  const std::size_t t = stc_treatment_column(spec);
  EstimateWithSE effect(fit.coefs[static_cast<Eigen::Index>(t)], fit.model_se(t));
  return {effect, std::move(fit)};
}

}  // namespace popadj
