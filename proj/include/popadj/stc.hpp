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
#include <vector>

#include "popadj/coxmodel.hpp"
#include "popadj/datagen.hpp"
#include "popadj/estimate.hpp"

namespace popadj {

/// Regressors of the STC outcome model.
struct StcModelSpec {
  std::vector<std::size_t> prognostic_columns{0, 1, 2, 3};
  std::vector<std::size_t> effect_modifier_columns{0, 1};
  /// When false the prognostic main effects are centered too. A Cox model
  /// has no intercept, so this leaves the treatment coefficient unchanged.
  bool center_effect_modifiers_only = true;

  void validate() const;
};

struct StcResult {
  /// Conditional A vs C log HR at the comparator-trial effect-modifier
  /// means, with model-based SE.
  EstimateWithSE effect;
  CoxFit fit;
};

/// Column layout of the STC design: prognostic main effects, treatment,
/// then treatment x (EM - center) interactions.
CoxData stc_design(const IpdTrial& ipd, const StcModelSpec& spec,
                   const std::vector<double>& em_centers,
                   const std::vector<double>& prognostic_centers = {});

/// Index of the treatment coefficient in the STC design.
std::size_t stc_treatment_column(const StcModelSpec& spec);

/// Fit with explicit effect-modifier centering constants.
StcResult stc_fit(const IpdTrial& ipd, const StcModelSpec& spec,
                  const std::vector<double>& em_centers);

/// Plug-in simulated treatment comparison: effect modifiers centered at the
/// comparator-trial means.
StcResult stc_estimate(const IpdTrial& ipd, const AldSummary& targets,
                       const StcModelSpec& spec = {});

}  // namespace popadj
