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

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>

#include <doctest.h>

#include "popadj/datagen.hpp"
#include "popadj/errors.hpp"
#include "popadj/io.hpp"
#include "popadj/plot.hpp"

using namespace popadj;

namespace {

std::vector<PerformanceSummary> full_summary() {
  std::vector<PerformanceSummary> rows;
  for (const Scenario& s : build_grid())
    for (Method m : kMethods) {
      PerformanceSummary p;
      p.scenario_id = s.id;
      p.method = m;
      p.bias = 0.001 * s.id + static_cast<int>(m);
      p.coverage = 0.9;
      p.variability_ratio = 1.0;
      rows.push_back(p);
    }
  return rows;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("doubles survive a text round trip exactly") {
  RandomStream rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(rng.normal(), static_cast<int>(rng() % 80) - 40);
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(std::isnan(parse_double("nan")));
  CHECK(format_double(0.1) == "0.1");
  CHECK_THROWS_AS(parse_double("1.5x"), ConfigError);
  CHECK_THROWS_AS(parse_double(""), ConfigError);
  CHECK(parse_integer(" 42 ") == 42);
  CHECK_THROWS_AS(parse_integer("4.2"), ConfigError);
}

TEST_CASE("CSV line splitting") {
  const auto f = split_csv_line("a, b,,c");
  REQUIRE(f.size() == 4);
  CHECK(f[2].empty());
}

TEST_CASE("IPD CSV round trip") {
  RandomStream rng(2);
  OutcomeModelParams p;
  p.treatment_coef = std::log(0.25);
  const IpdTrial t = generate_trial(CovariateSpec::uniform(0.45, 0.4, 0.35), p, 150, rng);
  std::stringstream ss;
  write_ipd_csv(ss, t);
  CHECK(ss.str().rfind("x1,x2,x3,x4,trt,time,event\n", 0) == 0);
  const IpdTrial back = read_ipd_csv(ss);
  REQUIRE(back.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(back.records[i].x == t.records[i].x);
    CHECK(back.records[i].time == t.records[i].time);
    CHECK(back.records[i].treatment == t.records[i].treatment);
    CHECK(back.records[i].event == t.records[i].event);
  }
}

TEST_CASE("malformed IPD is rejected") {
  std::istringstream no_header("1,2,3,4,1,1.0,1\n");
  CHECK_THROWS_AS(read_ipd_csv(no_header), ConfigError);
  std::istringstream bad_time("x1,x2,x3,x4,trt,time,event\n0,0,0,0,1,-1,1\n0,0,0,0,0,1,1\n");
  CHECK_THROWS_AS(read_ipd_csv(bad_time), ConfigError);
  std::istringstream short_row("x1,x2,x3,x4,trt,time,event\n0,0,0,0,1,1\n");
  CHECK_THROWS_AS(read_ipd_csv(short_row), ConfigError);
}

TEST_CASE("ALD key-value round trip with missing means") {
  AldSummary a;
  a.covariate_means = {0.6, 0.61, std::nan(""), 0.59};
  a.effect = EstimateWithSE(-0.512, 0.087);
  std::stringstream ss;
  write_ald(ss, a);
  const AldSummary b = read_ald(ss);
  CHECK(b.covariate_means[0] == 0.6);
  CHECK(std::isnan(b.covariate_means[2]));
  CHECK(b.effect == a.effect);
  std::istringstream commented("# trial B\nmean.x1 = 0.6\nmean.x2=0.6\nlogHR=-0.4\nse=0.1\n");
  CHECK(read_ald(commented).covariate_means[1] == 0.6);
  std::istringstream no_se("logHR=-0.4\n");
  CHECK_THROWS_AS(read_ald(no_se), ConfigError);
}

TEST_CASE("nested loop plot layout") {
  const NestedLoopPlot p = build_nested_loop_plot(full_summary(), "bias");
  REQUIRE(p.scenario_ids.size() == 162);
  CHECK(p.series.size() == 3);
  for (std::size_t i = 0; i < 162; ++i) CHECK(p.scenario_ids[i] == build_grid()[i].id);
  CHECK(p.series[1].values[4] == doctest::Approx(1.005));
  CHECK(p.factors.size() == 5);
  CHECK(p.factors[0].level_index[0] == 0);
  CHECK(p.factors[0].level_index[161] == 2);
  CHECK(p.factors[4].level_index[2] == 2);
  CHECK(p.reference_lines == std::vector<double>{0.0});
}

TEST_CASE("coverage plot carries the significance band") {
  const NestedLoopPlot p = build_nested_loop_plot(full_summary(), "coverage");
  CHECK(p.reference_lines == std::vector<double>{0.9365, 0.95, 0.9635});
  std::ostringstream svg;
  write_plot_svg(svg, p);
  CHECK(svg.str().rfind("<svg", 0) == 0);
  CHECK(svg.str().find("</svg>") != std::string::npos);
  CHECK(count(svg.str(), "stroke-dasharray") == 3);
  std::ostringstream csv;
  write_plot_csv(csv, p);
  CHECK(count(csv.str(), "\n") == 163);
  CHECK(csv.str().rfind("position,scenario_id,n_ac,prognostic_coef,interaction_coef,correlation,"
                        "ac_covariate_mean,maic,stc,bucher\n",
                        0) == 0);
}

TEST_CASE("plot requests outside the contract") {
  CHECK_THROWS_AS(build_nested_loop_plot(full_summary(), "power"), ConfigError);
  CHECK_FALSE(is_plot_metric("power"));
  CHECK(is_plot_metric("mse"));
  std::vector<PerformanceSummary> rows(1);
  rows[0].scenario_id = 999;
  CHECK_THROWS_AS(build_nested_loop_plot(rows, "bias"), ConfigError);
}

TEST_CASE("plot of a subset keeps grid order with missing series as NaN") {
  auto rows = full_summary();
  std::vector<PerformanceSummary> subset;
  for (const auto& r : rows)
    if ((r.scenario_id == 120 || r.scenario_id == 3) && r.method != Method::kStc) subset.push_back(r);
  const NestedLoopPlot p = build_nested_loop_plot(subset, "vr");
  CHECK(p.scenario_ids == std::vector<int>{3, 120});
  CHECK(std::isnan(p.series[1].values[0]));
  CHECK(p.series[0].values[1] == 1.0);
}
