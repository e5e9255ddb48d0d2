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

#include "popadj/simengine.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "popadj/errors.hpp"
#include "popadj/io.hpp"
#include "popadj/itc.hpp"
#include "popadj/stc.hpp"

namespace popadj {

std::vector<Scenario> build_grid(const std::function<bool(const Scenario&)>& filter) {
  std::vector<Scenario> grid;
  int id = 0;
  for (int n : kSampleSizes)
    for (double prog : kPrognosticCoefs)
      for (double inter : kInteractionCoefs)
        for (double rho : kCorrelations)
          for (double mu : kAcCovariateMeans) {
            const Scenario s{++id, n, prog, inter, rho, mu};
            if (!filter || filter(s)) grid.push_back(s);
          }
  return grid;
}

std::vector<Scenario> desk_grid() {
  const double very_strong = kPrognosticCoefs[2];
  const double moderate = kPrognosticCoefs[0];
  return build_grid([&](const Scenario& s) {
    if (s.n_ac != 150 && s.n_ac != 600) return false;
    const bool corner_a = s.prognostic_coef == very_strong && s.interaction_coef == moderate &&
                          s.correlation == 0.0;
    const bool corner_b = s.prognostic_coef == moderate && s.interaction_coef == very_strong &&
                          s.correlation == 0.35;
    return corner_a || corner_b;
  });
}

std::string describe(const Scenario& s) {
  std::ostringstream os;
  os << s.id << ',' << s.n_ac << ',' << format_double(s.prognostic_coef) << ','
     << format_double(s.interaction_coef) << ',' << format_double(s.correlation) << ','
     << format_double(s.ac_covariate_mean);
  return os.str();
}

std::string describe(const StudyConstants& c) {
  std::ostringstream os;
  os << "bc_n=" << c.bc_n << ";bc_mean=" << format_double(c.bc_covariate_mean)
     << ";sd=" << format_double(c.covariate_sd) << ";beta_t=" << format_double(c.treatment_coef)
     << ";lambda=" << format_double(c.weibull_inverse_scale)
     << ";nu=" << format_double(c.weibull_shape) << ";lambda_c=" << format_double(c.censoring_rate)
     << ";em=";
  for (std::size_t i = 0; i < c.effect_modifiers.size(); ++i)
    os << (i ? "|" : "") << c.effect_modifiers[i];
  return os.str();
}

std::string grid_hash(const std::vector<Scenario>& grid) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const Scenario& s : grid) {
    for (char c : describe(s) + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

CovariateSpec ac_covariates(const Scenario& s, const StudyConstants& c) {
  CovariateSpec spec = CovariateSpec::uniform(s.ac_covariate_mean, c.covariate_sd, s.correlation);
  spec.effect_modifiers = c.effect_modifiers;
  return spec;
}

CovariateSpec bc_covariates(const Scenario& s, const StudyConstants& c) {
  CovariateSpec spec = CovariateSpec::uniform(c.bc_covariate_mean, c.covariate_sd, s.correlation);
  spec.effect_modifiers = c.effect_modifiers;
  return spec;
}

OutcomeModelParams outcome_params(const Scenario& s, const StudyConstants& c) {
  OutcomeModelParams p;
  p.weibull_inverse_scale = c.weibull_inverse_scale;
  p.weibull_shape = c.weibull_shape;
  p.prognostic_coefs.fill(s.prognostic_coef);
  p.interaction_coefs.assign(c.effect_modifiers.size(), s.interaction_coef);
  p.treatment_coef = c.treatment_coef;
  p.censoring_rate = c.censoring_rate;
  return p;
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kMaic: return "maic";
    case Method::kStc: return "stc";
    case Method::kBucher: return "bucher";
  }
  return "?";
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::kOk: return "ok";
    case Status::kWeightFailure: return "weight_failure";
    case Status::kSeparation: return "separation";
    case Status::kCoxFailure: return "cox_failure";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  for (Method m : kMethods)
    if (to_string(m) == s) return m;
  throw ConfigError("unknown method: " + std::string(s));
}

Status parse_status(std::string_view s) {
  for (Status st : {Status::kOk, Status::kWeightFailure, Status::kSeparation, Status::kCoxFailure})
    if (to_string(st) == s) return st;
  throw ConfigError("unknown status: " + std::string(s));
}

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

Status status_of(const EstimationError& e) {
  switch (e.kind()) {
    case EstimationError::Kind::kNoFiniteWeights:
    case EstimationError::Kind::kWeightNonConvergence: return Status::kWeightFailure;
    case EstimationError::Kind::kSeparation: return Status::kSeparation;
    default: return Status::kCoxFailure;
  }
}

template <class F>
void record(ReplicateResult& r, F&& estimate) {
  try {
    estimate(r);
    r.status = Status::kOk;
  } catch (const EstimationError& e) {
    r.status = status_of(e);
  } catch (const DomainError&) {
    r.status = Status::kCoxFailure;
  }
  if (r.status != Status::kOk) {
    r.estimate = std::nan("");
    r.se = std::nan("");
  }
}

}  // namespace

bool operator==(const ReplicateResult& a, const ReplicateResult& b) {
  return a.scenario_id == b.scenario_id && a.replicate_id == b.replicate_id &&
         a.method == b.method && a.status == b.status && same_bits(a.estimate, b.estimate) &&
         same_bits(a.se, b.se) && same_bits(a.ess, b.ess);
}

bool result_less(const ReplicateResult& a, const ReplicateResult& b) {
  if (a.scenario_id != b.scenario_id) return a.scenario_id < b.scenario_id;
  if (a.replicate_id != b.replicate_id) return a.replicate_id < b.replicate_id;
  return static_cast<int>(a.method) < static_cast<int>(b.method);
}

std::array<ReplicateResult, 3> run_replicate(const Scenario& scenario, int replicate_id,
                                             std::uint64_t seed_root, const EngineConfig& config) {
  const StudyConstants& c = config.constants;
  const auto sid = static_cast<std::uint64_t>(scenario.id);
  const auto rid = static_cast<std::uint64_t>(replicate_id);
  RandomStream ac_rng = RandomStream::derive(seed_root, {sid, rid, static_cast<std::uint64_t>(StreamRole::kAcTrial)});
  RandomStream bc_rng = RandomStream::derive(seed_root, {sid, rid, static_cast<std::uint64_t>(StreamRole::kBcTrial)});
  const RandomStream boot_rng = RandomStream::derive(seed_root, {sid, rid, static_cast<std::uint64_t>(StreamRole::kBootstrap)});

  std::array<ReplicateResult, 3> out;
  for (std::size_t m = 0; m < out.size(); ++m) {
    out[m].scenario_id = scenario.id;
    out[m].replicate_id = replicate_id;
    out[m].method = kMethods[m];
  }

  const OutcomeModelParams params = outcome_params(scenario, c);
  const IpdTrial ac = generate_trial(ac_covariates(scenario, c), params,
                                     static_cast<std::size_t>(scenario.n_ac), ac_rng);
  const IpdTrial bc_ipd = generate_trial(bc_covariates(scenario, c), params,
                                         static_cast<std::size_t>(c.bc_n), bc_rng);
  AldSummary bc;
  try {
    bc = aggregate_trial(bc_ipd);
  } catch (const EstimationError& e) {
    for (ReplicateResult& r : out) r.status = status_of(e);
    return out;
  }

  record(out[0], [&](ReplicateResult& r) {
    const MaicResult maic = maic_estimate(ac, bc, c.effect_modifiers, config.maic_variance, boot_rng);
    const EstimateWithSE ab = indirect_comparison(maic.effect, bc.effect);
    r.estimate = ab.value();
    r.se = ab.se();
    r.ess = maic.weights.ess;
  });
  record(out[1], [&](ReplicateResult& r) {
    StcModelSpec spec;
    spec.effect_modifier_columns = c.effect_modifiers;
    const EstimateWithSE ab = indirect_comparison(stc_estimate(ac, bc, spec).effect, bc.effect);
    r.estimate = ab.value();
    r.se = ab.se();
  });
  record(out[2], [&](ReplicateResult& r) {
    const EstimateWithSE ab = bucher_estimate(ac, bc);
    r.estimate = ab.value();
    r.se = ab.se();
  });
  return out;
}

namespace {

struct WorkItem {
  std::size_t scenario_index;
  int replicate_id;
};

std::vector<WorkItem> plan(const std::vector<Scenario>& grid, int n_replicates,
                           const StudyHooks& hooks) {
  if (n_replicates < 1) throw ConfigError("number of replicates must be at least 1");
  std::vector<WorkItem> items;
  for (std::size_t s = 0; s < grid.size(); ++s)
    for (int r = 1; r <= n_replicates; ++r)
      if (!hooks.skip || !hooks.skip(grid[s].id, r)) items.push_back({s, r});
  return items;
}

std::vector<ReplicateResult> flatten(const std::vector<std::array<ReplicateResult, 3>>& slots) {
  std::vector<ReplicateResult> out;
  out.reserve(slots.size() * 3);
  for (const auto& triple : slots) out.insert(out.end(), triple.begin(), triple.end());
  std::sort(out.begin(), out.end(), result_less);
  return out;
}

}  // namespace

std::vector<ReplicateResult> run_study(const std::vector<Scenario>& grid, int n_replicates,
                                       std::uint64_t seed_root, int workers,
                                       const EngineConfig& config, const StudyHooks& hooks) {
  if (workers < 1) throw ConfigError("worker count must be at least 1");
  const std::vector<WorkItem> items = plan(grid, n_replicates, hooks);
  std::vector<std::array<ReplicateResult, 3>> slots(items.size());
  std::mutex mu;
  std::size_t done = 0;
  const auto count = static_cast<std::ptrdiff_t>(items.size());

#pragma omp parallel for schedule(dynamic, 4) num_threads(workers)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const WorkItem& item = items[static_cast<std::size_t>(i)];
    slots[static_cast<std::size_t>(i)] =
        run_replicate(grid[item.scenario_index], item.replicate_id, seed_root, config);
    if (hooks.on_replicate || hooks.on_progress) {
      std::lock_guard lock(mu);
      ++done;
      if (hooks.on_replicate) hooks.on_replicate(slots[static_cast<std::size_t>(i)]);
      if (hooks.on_progress) hooks.on_progress(done, items.size());
    }
  }
  return flatten(slots);
}

std::vector<ReplicateResult> run_study_serial(const std::vector<Scenario>& grid,
                                              int n_replicates, std::uint64_t seed_root,
                                              const EngineConfig& config,
                                              const StudyHooks& hooks) {
  const std::vector<WorkItem> items = plan(grid, n_replicates, hooks);
  std::vector<std::array<ReplicateResult, 3>> slots;
  slots.reserve(items.size());
  for (const WorkItem& item : items) {
    slots.push_back(run_replicate(grid[item.scenario_index], item.replicate_id, seed_root, config));
    if (hooks.on_replicate) hooks.on_replicate(slots.back());
    if (hooks.on_progress) hooks.on_progress(slots.size(), items.size());
  }
  return flatten(slots);
}

void write_results_header(std::ostream& os) {
  os << "scenario_id,replicate_id,method,estimate,se,status,ess\n";
}

void write_result(std::ostream& os, const ReplicateResult& r) {
  os << r.scenario_id << ',' << r.replicate_id << ',' << to_string(r.method) << ','
     << format_double(r.estimate) << ',' << format_double(r.se) << ',' << to_string(r.status)
     << ',' << format_double(r.ess) << '\n';
}

std::vector<ReplicateResult> read_results_csv(std::istream& is) {
  std::vector<ReplicateResult> out;
  std::string line;
  if (!std::getline(is, line)) return out;
  if (line.rfind("scenario_id,", 0) != 0) throw ConfigError("replicate CSV has no header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const bool complete = !is.eof();  // last line without '\n' may be torn
    const auto f = split_csv_line(line);
    try {
      if (f.size() != 7) throw ConfigError("replicate CSV: expected 7 fields");
      ReplicateResult r;
      r.scenario_id = static_cast<int>(parse_integer(f[0]));
      r.replicate_id = static_cast<int>(parse_integer(f[1]));
      r.method = parse_method(f[2]);
      r.estimate = parse_double(f[3]);
      r.se = parse_double(f[4]);
      r.status = parse_status(f[5]);
      r.ess = parse_double(f[6]);
      if (!complete) break;
      out.push_back(r);
    } catch (const ConfigError&) {
      if (complete) throw;
    }
  }
  return out;
}

std::set<std::pair<int, int>> completed_replicates(const std::vector<ReplicateResult>& results) {
  std::map<std::pair<int, int>, int> seen;
  for (const ReplicateResult& r : results)
    seen[{r.scenario_id, r.replicate_id}] |= 1 << static_cast<int>(r.method);
  std::set<std::pair<int, int>> done;
  for (const auto& [key, mask] : seen)
    if (mask == 0b111) done.insert(key);
  return done;
}

void write_manifest(std::ostream& os, const RunManifest& m) {
  os << "seed_root=" << m.seed_root << '\n'
     << "grid_hash=" << m.grid_hash << '\n'
     << "version=" << m.version << '\n'
     << "n_replicates=" << m.n_replicates << '\n'
     << "maic_variance=" << m.maic_variance << '\n'
     << "constants=" << m.constants << '\n';
}

RunManifest read_manifest(std::istream& is) {
  RunManifest m;
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "seed_root") m.seed_root = std::stoull(value);
    else if (key == "grid_hash") m.grid_hash = value;
    else if (key == "version") m.version = value;
    else if (key == "n_replicates") m.n_replicates = std::stoi(value);
    else if (key == "maic_variance") m.maic_variance = value;
    else if (key == "constants") m.constants = value;
  }
  return m;
}

}  // namespace popadj
