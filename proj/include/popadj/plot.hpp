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

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "popadj/metrics.hpp"

namespace popadj {

/// Data behind a nested loop plot: scenarios laid out in grid-id order
/// (the nested factor loops of build_grid), one series per method, and a
/// step trace per factor showing which level each position belongs to.
struct NestedLoopPlot {
  struct Factor {
    std::string name;
    std::vector<double> levels;
    std::vector<int> level_index;  // per position
  };
  struct Series {
    Method method;
    std::vector<double> values;  // per position, NaN when missing
  };

  std::string metric;
  std::vector<int> scenario_ids;
  std::vector<Factor> factors;
  std::vector<Series> series;
  std::vector<double> reference_lines;
};

/// Metrics accepted by the plot command.
bool is_plot_metric(std::string_view metric);
double metric_value(const PerformanceSummary& p, std::string_view metric);

/// Throws ConfigError for unknown metrics or scenario ids outside the grid.
NestedLoopPlot build_nested_loop_plot(const std::vector<PerformanceSummary>& rows,
                                      std::string_view metric);

void write_plot_csv(std::ostream& os, const NestedLoopPlot& plot);
void write_plot_svg(std::ostream& os, const NestedLoopPlot& plot);

}  // namespace popadj
