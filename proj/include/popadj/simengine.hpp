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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "popadj/datagen.hpp"
#include "popadj/maic.hpp"

namespace popadj {

/// The marginal A vs B effect in the comparator population is zero in every
/// scenario: both active treatments share the treatment coefficient and the
/// interaction effects.
inline constexpr double kTrueEffect = 0.0;

inline const std::array<int, 3> kSampleSizes{150, 300, 600};
inline const std::array<double, 3> kPrognosticCoefs{-std::log(0.67), -std::log(0.5), -std::log(0.33)};
inline const std::array<double, 3> kInteractionCoefs{-std::log(0.67), -std::log(0.5), -std::log(0.33)};
inline const std::array<double, 2> kCorrelations{0.0, 0.35};
inline const std::array<double, 3> kAcCovariateMeans{0.45, 0.30, 0.15};

/// Settings shared by every scenario.
struct StudyConstants {
  int bc_n = 600;
  double bc_covariate_mean = 0.6;
  // Variance 0.2 per covariate.
  double covariate_sd = std::sqrt(0.2);
  double treatment_coef = std::log(0.25);
  double weibull_inverse_scale = 8.5;
  double weibull_shape = 1.3;
  double censoring_rate = 0.96;
  std::vector<std::size_t> effect_modifiers{0, 1};
};

struct Scenario {
  int id = 0;
  int n_ac = 0;
  double prognostic_coef = 0.0;   // applied to all four covariates
  double interaction_coef = 0.0;  // applied to both effect modifiers
  double correlation = 0.0;
  double ac_covariate_mean = 0.0;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Full factorial grid, loops nested as (n_ac, prognostic, interaction,
/// correlation, AC mean) with the last varying fastest; ids 1..162 follow
/// this order and are kept when a filter drops scenarios.
std::vector<Scenario> build_grid(const std::function<bool(const Scenario&)>& filter = {});

/// Twelve-scenario desk subset: n_ac in {150, 600} x every overlap level x
/// two coefficient corners, (very strong prognostic, moderate interaction,
/// rho = 0) and (moderate prognostic, very strong interaction, rho = 0.35).
std::vector<Scenario> desk_grid();

/// One text line per scenario, used for hashing and manifests.
std::string describe(const Scenario& s);
std::string grid_hash(const std::vector<Scenario>& grid);
/// Every constant that changes the simulated data, on one line.
std::string describe(const StudyConstants& c);

CovariateSpec ac_covariates(const Scenario& s, const StudyConstants& c);
CovariateSpec bc_covariates(const Scenario& s, const StudyConstants& c);
OutcomeModelParams outcome_params(const Scenario& s, const StudyConstants& c);

enum class Method { kMaic = 0, kStc = 1, kBucher = 2 };
enum class Status { kOk, kWeightFailure, kSeparation, kCoxFailure };

inline constexpr std::array<Method, 3> kMethods{Method::kMaic, Method::kStc, Method::kBucher};

std::string_view to_string(Method m);
std::string_view to_string(Status s);
Method parse_method(std::string_view s);
Status parse_status(std::string_view s);

struct ReplicateResult {
  int scenario_id = 0;
  int replicate_id = 0;
  Method method = Method::kMaic;
  double estimate = std::nan("");  // A vs B log HR
  double se = std::nan("");
  Status status = Status::kOk;
  double ess = std::nan("");  // MAIC only

  friend bool operator==(const ReplicateResult& a, const ReplicateResult& b);
};

/// Orders by (scenario, replicate, method).
bool result_less(const ReplicateResult& a, const ReplicateResult& b);

struct EngineConfig {
  StudyConstants constants;
  VarianceMethod maic_variance = VarianceMethod::sandwich();
};

/// One Monte Carlo replicate: simulate the AC IPD and the BC trial from
/// streams keyed by (seed_root, scenario, replicate, role), aggregate BC,
/// and apply MAIC, STC and Bucher to the same data. Estimator failures are
/// recorded as statuses, never thrown.
std::array<ReplicateResult, 3> run_replicate(const Scenario& scenario, int replicate_id,
                                             std::uint64_t seed_root,
                                             const EngineConfig& config = {});

struct StudyHooks {
  /// Replicates to skip (already on disk).
  std::function<bool(int scenario_id, int replicate_id)> skip;
  /// Called for every finished replicate; calls are serialized.
  std::function<void(const std::array<ReplicateResult, 3>&)> on_replicate;
  /// Called with (completed, total) after each replicate; serialized.
  std::function<void(std::size_t, std::size_t)> on_progress;
};

/// All scenario x replicate results, sorted with result_less. Replicates
/// run concurrently on `workers` OpenMP threads; the content does not depend
/// on the worker count.
std::vector<ReplicateResult> run_study(const std::vector<Scenario>& grid, int n_replicates,
                                       std::uint64_t seed_root, int workers,
                                       const EngineConfig& config = {},
                                       const StudyHooks& hooks = {});

/// Single-threaded reference for run_study.
std::vector<ReplicateResult> run_study_serial(const std::vector<Scenario>& grid,
                                              int n_replicates, std::uint64_t seed_root,
                                              const EngineConfig& config = {},
                                              const StudyHooks& hooks = {});

// Replicate CSV: scenario_id,replicate_id,method,estimate,se,status,ess
void write_results_header(std::ostream& os);
void write_result(std::ostream& os, const ReplicateResult& r);
/// Skips a truncated trailing line so that interrupted runs can resume.
std::vector<ReplicateResult> read_results_csv(std::istream& is);

/// (scenario, replicate) pairs for which all three methods are present.
std::set<std::pair<int, int>> completed_replicates(const std::vector<ReplicateResult>& results);

struct RunManifest {
  std::uint64_t seed_root = 0;
  std::string grid_hash;
  std::string version;
  int n_replicates = 0;
  std::string maic_variance;
  std::string constants;  // describe(StudyConstants)
};

void write_manifest(std::ostream& os, const RunManifest& m);
RunManifest read_manifest(std::istream& is);

}  // namespace popadj
