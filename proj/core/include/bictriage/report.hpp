// Copyright 2026, The bictriage Authors
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
#include <string>

#include "bictriage/harness.hpp"

namespace bictriage {

/// One row per day x method:
///   day,method,tp,tn,fp,fn,ppv,npv,sns,spc,acc
/// Counts are exact integers; metrics print with six decimals; undefined
/// metrics are empty fields. Output is byte-deterministic.
std::string render_csv(const RunReport& report);

/// Rebuilds a report from report.csv text. Integer counts round-trip
/// exactly; metrics and aggregates are recomputed from them.
RunReport parse_csv(const std::string& text);

/// Daily accuracy line chart, one polyline per method.
std::string render_accuracy_svg(const RunReport& report);

/// Bar chart of macro-averaged metrics grouped by metric.
std::string render_averages_svg(const RunReport& report);

/// Config echo plus an environment stamp.
std::string render_run_json(const RunConfig& config, const RunReport& report);

/// Writes report.csv, accuracy.svg, averages.svg and run.json to out_dir.
void write_report_files(const RunReport& report, const RunConfig& config,
                        const std::filesystem::path& out_dir);

}  // namespace bictriage
