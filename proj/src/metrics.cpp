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

#include "popadj/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "popadj/errors.hpp"
#include "popadj/io.hpp"
#include "popadj/itc.hpp"

namespace popadj {

bool PerformanceSummary::problematic_bias() const {
  return std::abs(standardized_bias_pct) > kProblematicStdBiasPct;
}

double bias_mcse(double ese, int n) { return ese / std::sqrt(static_cast<double>(n)); }

double ese_mcse(double ese, int n) { return ese / std::sqrt(2.0 * (n - 1)); }

double coverage_mcse(double coverage, int n) {
  return std::sqrt(coverage * (1.0 - coverage) / static_cast<double>(n));
}

double mse_mcse(std::span<const double> squared_errors, double mse) {
  const auto n = static_cast<double>(squared_errors.size());
  double ss = 0.0;
  for (double e : squared_errors) ss += (e - mse) * (e - mse);
  return std::sqrt(ss / (n * (n - 1.0)));
}

PerformanceSummary summarize_cell(std::span<const double> estimates, std::span<const double> ses,
                                  double truth, double level) {
  if (estimates.size() != ses.size()) throw ConfigError("estimates and SEs differ in length");
  const int s = static_cast<int>(estimates.size());
  if (s < 2) throw DomainError("performance summary needs at least two ok replicates");
  const double z = normal_critical_value(level);
  const double sd = static_cast<double>(s);

  double sum = 0.0;
  double sum_se = 0.0;
  int covered = 0;
  std::vector<double> sq(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    sum += estimates[i];
    sum_se += ses[i];
    if (std::abs(estimates[i] - truth) <= z * ses[i]) ++covered;
    sq[i] = (estimates[i] - truth) * (estimates[i] - truth);
  }
  const double mean = sum / sd;
  double ss = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    ss += (estimates[i] - mean) * (estimates[i] - mean);
    sum_sq += sq[i];
  }

  PerformanceSummary p;
  p.n_used = s;
  p.bias = mean - truth;
  p.ese = std::sqrt(ss / (sd - 1.0));
  p.mean_model_se = sum_se / sd;
  p.variability_ratio = p.mean_model_se / p.ese;
  p.standardized_bias_pct = 100.0 * p.bias / p.ese;
  p.coverage = static_cast<double>(covered) / sd;
  p.mse = sum_sq / sd;
  p.bias_mcse = bias_mcse(p.ese, s);
  p.ese_mcse = ese_mcse(p.ese, s);
  p.coverage_mcse = coverage_mcse(p.coverage, s);
  p.mse_mcse = mse_mcse(sq, p.mse);
  return p;
}

std::vector<PerformanceSummary> summarize(std::vector<ReplicateResult> results, double truth,
                                          double level) {
  std::sort(results.begin(), results.end(), [](const ReplicateResult& a, const ReplicateResult& b) {
    if (a.scenario_id != b.scenario_id) return a.scenario_id < b.scenario_id;
    if (a.method != b.method) return static_cast<int>(a.method) < static_cast<int>(b.method);
    return a.replicate_id < b.replicate_id;
  });
  std::vector<PerformanceSummary> out;
  std::size_t i = 0;
  while (i < results.size()) {
    const int sid = results[i].scenario_id;
    const Method method = results[i].method;
    std::vector<double> est;
    std::vector<double> se;
    double ess_sum = 0.0;
    for (; i < results.size() && results[i].scenario_id == sid && results[i].method == method; ++i) {
      const ReplicateResult& r = results[i];
      if (r.status != Status::kOk) continue;
      est.push_back(r.estimate);
      se.push_back(r.se);
      ess_sum += std::isfinite(r.ess) ? r.ess : 0.0;
    }
    if (est.size() < 2)
      throw DomainError("scenario " + std::to_string(sid) + " method " +
                        std::string(to_string(method)) + ": fewer than two ok replicates");
    PerformanceSummary p = summarize_cell(est, se, truth, level);
    p.scenario_id = sid;
    p.method = method;
    p.mean_ess = method == Method::kMaic ? ess_sum / static_cast<double>(est.size()) : std::nan("");
    out.push_back(p);
  }
  return out;
}

void write_summary_csv(std::ostream& os, const std::vector<PerformanceSummary>& rows) {
  os << "scenario_id,method,n_used,bias,bias_mcse,std_bias_pct,ese,ese_mcse,vr,coverage,"
        "coverage_mcse,mse,mse_mcse,mean_model_se\n";
  for (const PerformanceSummary& p : rows) {
    os << p.scenario_id << ',' << to_string(p.method) << ',' << p.n_used;
    for (double v : {p.bias, p.bias_mcse, p.standardized_bias_pct, p.ese, p.ese_mcse,
                     p.variability_ratio, p.coverage, p.coverage_mcse, p.mse, p.mse_mcse,
                     p.mean_model_se})
      os << ',' << format_double(v);
    os << '\n';
  }
}

std::vector<PerformanceSummary> read_summary_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("scenario_id,method,", 0) != 0)
    throw ConfigError("summary CSV has no header");
  std::vector<PerformanceSummary> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 14) throw ConfigError("summary CSV: expected 14 fields");
    PerformanceSummary p;
    p.scenario_id = static_cast<int>(parse_integer(f[0]));
    p.method = parse_method(f[1]);
    p.n_used = static_cast<int>(parse_integer(f[2]));
    double* fields[] = {&p.bias, &p.bias_mcse, &p.standardized_bias_pct, &p.ese, &p.ese_mcse,
                        &p.variability_ratio, &p.coverage, &p.coverage_mcse, &p.mse, &p.mse_mcse,
                        &p.mean_model_se};
    for (std::size_t k = 0; k < 11; ++k) *fields[k] = parse_double(f[3 + k]);
    p.mean_ess = std::nan("");
    out.push_back(p);
  }
  return out;
}

}  // namespace popadj
