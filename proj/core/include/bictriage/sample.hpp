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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bictriage {

enum class Label : std::uint8_t { benign = 0, malicious = 1 };

constexpr int label_value(Label label) { return label == Label::malicious ? 1 : 0; }
constexpr Label label_from_int(int value) { return value != 0 ? Label::malicious : Label::benign; }

/// The BIC feature space: valid indices run over [0, m_count).
struct FeatureSpace {
  std::uint32_t m_count = 0;

  bool contains(std::uint32_t index) const { return index < m_count; }
};

/// One sandbox sample: opaque id, sparse strictly-ascending list of
/// triggered BIC indices, optional MALICIOUS/BENIGN label. Unlabeled
/// samples flow through classification but never through training.
struct LabeledSample {
  std::string id;
  std::vector<std::uint32_t> bics;
  std::optional<Label> label;

  bool operator==(const LabeledSample&) const = default;
};

/// All samples of one calendar day, in file order. The order is
/// load-bearing: the max-precision corrective pass consumes samples in
/// exactly this order.
struct DailyBatch {
  std::string day;   // ISO date, taken from the file name
  std::vector<LabeledSample> samples;

  bool operator==(const DailyBatch&) const = default;
};

/// Raised on malformed input; carries the source name and 1-based line
/// number when known. Validation is fatal by design: a triage pipeline
/// must not silently drop data.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& message);
  explicit ParseError(const std::string& message);

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_ = 0;
};

/// Checks the LabeledSample invariants against a space; throws ParseError
/// naming the offending field.
void validate_sample(const LabeledSample& sample, const FeatureSpace& space);

/// Parses newline-delimited JSON records, one sample per line:
///   {"id": <string>, "label": 0 | 1 | null, "bics": [<int>, ...]}
/// Malformed records, out-of-range or non-ascending BIC indices and
/// duplicate ids all throw ParseError with the line number. The returned
/// batch preserves record order; its day field is left empty.
DailyBatch parse_daily_file(std::istream& in, const FeatureSpace& space,
                            const std::string& source_name = "<stream>");

/// Canonical serialization; parse_daily_file(write_daily_file(b)) == b.
void write_daily_file(const DailyBatch& batch, std::ostream& out);

/// Loads `<dir>/YYYY-MM-DD.jsonl`; the batch day is the file stem.
DailyBatch load_daily_file(const std::filesystem::path& file, const FeatureSpace& space);
void save_daily_file(const DailyBatch& batch, const std::filesystem::path& file);

/// Daily files of a dataset directory, sorted by file name (lexicographic
/// order is chronological order for YYYY-MM-DD names).
std::vector<std::filesystem::path> list_daily_files(const std::filesystem::path& dir);

/// Reads/writes the sidecar `meta.json` carrying {"m_count": <int>}.
FeatureSpace read_meta(const std::filesystem::path& dir);
void write_meta(const FeatureSpace& space, const std::filesystem::path& dir);

/// Dense 0/1 view of the sparse index list, length m_count.
std::vector<std::uint8_t> dense_vector(const LabeledSample& sample, const FeatureSpace& space);

}  // namespace bictriage
