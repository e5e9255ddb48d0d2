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

#include <cmath>
#include <string>

#include "popadj/errors.hpp"

namespace popadj {

/// A relative treatment effect on the log hazard ratio scale with its
/// standard error. The standard error is always finite and positive.
class EstimateWithSE {
 public:
  EstimateWithSE(double value, double se) : value_(value), se_(se) {
    if (!std::isfinite(value))
      throw DomainError("estimate must be finite");
    if (!std::isfinite(se) || se <= 0.0)
      throw DomainError("standard error must be finite and positive, got " +
                        std::to_string(se));
  }

  double value() const noexcept { return value_; }
  double se() const noexcept { return se_; }
  double variance() const noexcept { return se_ * se_; }

  friend bool operator==(const EstimateWithSE&, const EstimateWithSE&) = default;

 private:
  double value_;
  double se_;
};

}  // namespace popadj
