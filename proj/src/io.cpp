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

#include "popadj/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "popadj/errors.hpp"

namespace popadj {

namespace {

constexpr std::string_view kIpdHeader = "x1,x2,x3,x4,trt,time,event";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view field) {
  field = trim(field);
  if (field == "nan" || field == "NaN" || field == "NA") return std::numeric_limits<double>::quiet_NaN();
  if (field == "inf") return std::numeric_limits<double>::infinity();
  if (field == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, v);
  if (field.empty() || res.ec != std::errc{} || res.ptr != end)
    throw ConfigError("not a number: '" + std::string(field) + "'");
  return v;
}

long long parse_integer(std::string_view field) {
  field = trim(field);
  long long v = 0;
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(field.data(), end, v);
  if (field.empty() || res.ec != std::errc{} || res.ptr != end)
    throw ConfigError("not an integer: '" + std::string(field) + "'");
  return v;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

void write_ipd_csv(std::ostream& os, const IpdTrial& trial) {
  os << kIpdHeader << '\n';
  for (const IpdRecord& r : trial.records) {
    for (double v : r.x) os << format_double(v) << ',';
    os << r.treatment << ',' << format_double(r.time) << ',' << r.event << '\n';
  }
}

IpdTrial read_ipd_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != kIpdHeader)
    throw ConfigError("IPD CSV must start with header '" + std::string(kIpdHeader) + "'");
  IpdTrial trial;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 7)
      throw ConfigError("IPD CSV line " + std::to_string(line_no) + ": expected 7 fields");
    IpdRecord r;
    for (std::size_t k = 0; k < kNumCovariates; ++k) r.x[k] = parse_double(fields[k]);
    r.treatment = static_cast<int>(parse_integer(fields[4]));
    r.time = parse_double(fields[5]);
    r.event = static_cast<int>(parse_integer(fields[6]));
    trial.records.push_back(r);
  }
  trial.validate();
  return trial;
}

void write_ald(std::ostream& os, const AldSummary& ald) {
  for (std::size_t k = 0; k < kNumCovariates; ++k)
    if (!std::isnan(ald.covariate_means[k]))
      os << "mean.x" << k + 1 << '=' << format_double(ald.covariate_means[k]) << '\n';
  os << "logHR=" << format_double(ald.effect.value()) << '\n';
  os << "se=" << format_double(ald.effect.se()) << '\n';
}

AldSummary read_ald(std::istream& is) {
  Covariates means;
  means.fill(std::numeric_limits<double>::quiet_NaN());
  double log_hr = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  std::string line;
  while (std::getline(is, line)) {
    const std::string_view body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ConfigError("ALD line without '=': " + line);
    const std::string_view key = trim(body.substr(0, eq));
    const double value = parse_double(body.substr(eq + 1));
    if (key == "logHR") {
      log_hr = value;
    } else if (key == "se") {
      se = value;
    } else if (key.starts_with("mean.x")) {
      const long long idx = parse_integer(key.substr(6));
      if (idx < 1 || idx > static_cast<long long>(kNumCovariates))
        throw ConfigError("ALD covariate index out of range: " + std::string(key));
      means[static_cast<std::size_t>(idx - 1)] = value;
    } else {
      throw ConfigError("unknown ALD key: " + std::string(key));
    }
  }
  if (std::isnan(log_hr) || std::isnan(se)) throw ConfigError("ALD file must define logHR and se");
  return {means, EstimateWithSE(log_hr, se)};
}

IpdTrial read_ipd_csv_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_ipd_csv(in);
}

AldSummary read_ald_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_ald(in);
}

void write_ipd_csv_file(const std::filesystem::path& path, const IpdTrial& trial) {
  auto out = open_out(path);
  write_ipd_csv(out, trial);
}

void write_ald_file(const std::filesystem::path& path, const AldSummary& ald) {
  auto out = open_out(path);
  write_ald(out, ald);
}

}  // namespace popadj
