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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "popadj/datagen.hpp"

namespace popadj {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

/// Strict parse of a whole field; throws ConfigError on junk.
double parse_double(std::string_view field);
long long parse_integer(std::string_view field);

/// Splits on commas; no quoting (none of our formats need it).
std::vector<std::string_view> split_csv_line(std::string_view line);

/// IPD CSV with header `x1,x2,x3,x4,trt,time,event`.
void write_ipd_csv(std::ostream& os, const IpdTrial& trial);
IpdTrial read_ipd_csv(std::istream& is);

/// Flat key-value text: `mean.x1=...` per covariate, `logHR=...`, `se=...`.
/// Blank lines and `#` comments are ignored. Absent means read as NaN.
void write_ald(std::ostream& os, const AldSummary& ald);
AldSummary read_ald(std::istream& is);

IpdTrial read_ipd_csv_file(const std::filesystem::path& path);
AldSummary read_ald_file(const std::filesystem::path& path);
void write_ipd_csv_file(const std::filesystem::path& path, const IpdTrial& trial);
void write_ald_file(const std::filesystem::path& path, const AldSummary& ald);

}  // namespace popadj
