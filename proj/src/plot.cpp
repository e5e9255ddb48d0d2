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

#include "popadj/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "popadj/errors.hpp"
#include "popadj/io.hpp"

namespace popadj {

namespace {

constexpr std::string_view kMetrics[] = {"bias", "vr", "coverage", "ese", "mse"};

int level_of(double v, const auto& levels) {
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (levels[i] == v) return static_cast<int>(i);
  return -1;
}

}  // namespace

bool is_plot_metric(std::string_view metric) {
  return std::find(std::begin(kMetrics), std::end(kMetrics), metric) != std::end(kMetrics);
}

double metric_value(const PerformanceSummary& p, std::string_view metric) {
  if (metric == "bias") return p.bias;
  if (metric == "vr") return p.variability_ratio;
  if (metric == "coverage") return p.coverage;
  if (metric == "ese") return p.ese;
  if (metric == "mse") return p.mse;
  throw ConfigError("unknown metric '" + std::string(metric) + "' (bias, vr, coverage, ese, mse)");
}

NestedLoopPlot build_nested_loop_plot(const std::vector<PerformanceSummary>& rows,
                                      std::string_view metric) {
  if (!is_plot_metric(metric))
    throw ConfigError("unknown metric '" + std::string(metric) + "' (bias, vr, coverage, ese, mse)");
  std::map<int, Scenario> by_id;
  for (const Scenario& s : build_grid()) by_id[s.id] = s;

  std::set<int> ids;
  for (const PerformanceSummary& p : rows) {
    if (!by_id.count(p.scenario_id))
      throw ConfigError("scenario id " + std::to_string(p.scenario_id) + " is not in the grid");
    ids.insert(p.scenario_id);
  }

  NestedLoopPlot plot;
  plot.metric = std::string(metric);
  plot.scenario_ids.assign(ids.begin(), ids.end());
  std::map<int, std::size_t> position;
  for (std::size_t i = 0; i < plot.scenario_ids.size(); ++i) position[plot.scenario_ids[i]] = i;

  const auto as_vec = [](const auto& arr) { return std::vector<double>(arr.begin(), arr.end()); };
  plot.factors = {
      {"n_ac", as_vec(kSampleSizes), {}},
      {"prognostic_coef", as_vec(kPrognosticCoefs), {}},
      {"interaction_coef", as_vec(kInteractionCoefs), {}},
      {"correlation", as_vec(kCorrelations), {}},
      {"ac_covariate_mean", as_vec(kAcCovariateMeans), {}},
  };
  for (int id : plot.scenario_ids) {
    const Scenario& s = by_id[id];
    plot.factors[0].level_index.push_back(level_of(s.n_ac, kSampleSizes));
    plot.factors[1].level_index.push_back(level_of(s.prognostic_coef, kPrognosticCoefs));
    plot.factors[2].level_index.push_back(level_of(s.interaction_coef, kInteractionCoefs));
    plot.factors[3].level_index.push_back(level_of(s.correlation, kCorrelations));
    plot.factors[4].level_index.push_back(level_of(s.ac_covariate_mean, kAcCovariateMeans));
  }

  for (Method m : kMethods) {
    NestedLoopPlot::Series series{m, std::vector<double>(ids.size(), std::nan(""))};
    for (const PerformanceSummary& p : rows)
      if (p.method == m) series.values[position[p.scenario_id]] = metric_value(p, metric);
    plot.series.push_back(std::move(series));
  }

  if (metric == "bias") plot.reference_lines = {0.0};
  else if (metric == "vr") plot.reference_lines = {1.0};
  else if (metric == "coverage") plot.reference_lines = {0.9365, 0.95, 0.9635};
  return plot;
}

void write_plot_csv(std::ostream& os, const NestedLoopPlot& plot) {
  os << "position,scenario_id";
  for (const auto& f : plot.factors) os << ',' << f.name;
  for (const auto& s : plot.series) os << ',' << to_string(s.method);
  os << '\n';
  for (std::size_t i = 0; i < plot.scenario_ids.size(); ++i) {
    os << i + 1 << ',' << plot.scenario_ids[i];
    for (const auto& f : plot.factors)
      os << ',' << format_double(f.levels[static_cast<std::size_t>(f.level_index[i])]);
    for (const auto& s : plot.series) os << ',' << format_double(s.values[i]);
    os << '\n';
  }
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << v;
  return os.str();
}

std::string tick_label(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

void write_plot_svg(std::ostream& os, const NestedLoopPlot& plot) {
  constexpr double kWidth = 1000, kLeft = 70, kRight = 140, kTop = 30;
  constexpr double kMainHeight = 360, kTraceHeight = 28, kTraceGap = 8;
  const double trace_top = kTop + kMainHeight + 30;
  const double height =
      trace_top + static_cast<double>(plot.factors.size()) * (kTraceHeight + kTraceGap) + 20;
  const double plot_w = kWidth - kLeft - kRight;
  const std::size_t n = plot.scenario_ids.size();
  const double step = n > 0 ? plot_w / static_cast<double>(n) : plot_w;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : plot.series)
    for (double v : s.values)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  for (double r : plot.reference_lines) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  if (!std::isfinite(lo)) {
    lo = 0;
    hi = 1;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const auto y_of = [&](double v) { return kTop + kMainHeight * (hi - v) / (hi - lo); };
  const auto x_left = [&](std::size_t i) { return kLeft + step * static_cast<double>(i); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << fmt(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kLeft << "\" y=\"18\" font-size=\"14\">" << plot.metric
     << " across scenarios (nested loop order)</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << fmt(plot_w)
     << "\" height=\"" << kMainHeight << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt(y_of(v) + 4)
       << "\" text-anchor=\"end\">" << tick_label(v) << "</text>\n";
  }

  if (plot.metric == "coverage" && plot.reference_lines.size() == 3) {
    os << "<rect x=\"" << kLeft << "\" y=\"" << fmt(y_of(plot.reference_lines[2]))
       << "\" width=\"" << fmt(plot_w) << "\" height=\""
       << fmt(y_of(plot.reference_lines[0]) - y_of(plot.reference_lines[2]))
       << "\" fill=\"#dddddd\" opacity=\"0.6\"/>\n";
  }
  for (double r : plot.reference_lines)
    os << "<line x1=\"" << kLeft << "\" x2=\"" << fmt(kLeft + plot_w) << "\" y1=\"" << fmt(y_of(r))
       << "\" y2=\"" << fmt(y_of(r)) << "\" stroke=\"gray\" stroke-dasharray=\"4,3\"/>\n";

  const char* colors[] = {"#1b9e77", "#d95f02", "#7570b3"};
  for (std::size_t m = 0; m < plot.series.size(); ++m) {
    const auto& s = plot.series[m];
    os << "<polyline fill=\"none\" stroke=\"" << colors[m % 3] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.values[i])) continue;
      const double y = y_of(s.values[i]);
      os << fmt(x_left(i)) << ',' << fmt(y) << ' ' << fmt(x_left(i + 1)) << ',' << fmt(y) << ' ';
    }
    os << "\"/>\n";
    const double ly = kTop + 20 + 18 * static_cast<double>(m);
    os << "<line x1=\"" << fmt(kLeft + plot_w + 15) << "\" x2=\"" << fmt(kLeft + plot_w + 40)
       << "\" y1=\"" << ly << "\" y2=\"" << ly << "\" stroke=\"" << colors[m % 3]
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << fmt(kLeft + plot_w + 45) << "\" y=\"" << ly + 4 << "\">"
       << to_string(s.method) << "</text>\n";
  }

  for (std::size_t f = 0; f < plot.factors.size(); ++f) {
    const auto& factor = plot.factors[f];
    const double top = trace_top + static_cast<double>(f) * (kTraceHeight + kTraceGap);
    const double levels = static_cast<double>(std::max<std::size_t>(factor.levels.size() - 1, 1));
    os << "<text x=\"" << fmt(kLeft + plot_w + 15) << "\" y=\"" << fmt(top + kTraceHeight / 2 + 4)
       << "\">" << factor.name << "</text>\n";
    os << "<polyline fill=\"none\" stroke=\"black\" points=\"";
    for (std::size_t i = 0; i < n; ++i) {
      const double y = top + kTraceHeight * (1.0 - factor.level_index[i] / levels);
      os << fmt(x_left(i)) << ',' << fmt(y) << ' ' << fmt(x_left(i + 1)) << ',' << fmt(y) << ' ';
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
}

}  // namespace popadj
