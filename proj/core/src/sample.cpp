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

#include "bictriage/sample.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

namespace bictriage {

namespace {

std::string format_location(const std::string& source, std::size_t line,
                            const std::string& message) {
  std::string out = source;
  if (line > 0) {
    out += ":" + std::to_string(line);
  }
  out += ": " + message;
  return out;
}

}  // namespace

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& message)
    : std::runtime_error(format_location(source, line, message)), source_(source), line_(line) {}

ParseError::ParseError(const std::string& message) : std::runtime_error(message) {}

void validate_sample(const LabeledSample& sample, const FeatureSpace& space) {
  if (sample.id.empty()) {
    throw ParseError("sample id is empty");
  }
  for (std::size_t i = 0; i < sample.bics.size(); ++i) {
    if (!space.contains(sample.bics[i])) {
      throw ParseError("BIC index " + std::to_string(sample.bics[i]) + " out of range [0, " +
                       std::to_string(space.m_count) + ") in sample '" + sample.id + "'");
    }
    if (i > 0 && sample.bics[i - 1] >= sample.bics[i]) {
      throw ParseError("non-ascending BIC list in sample '" + sample.id + "'");
    }
  }
}

namespace {

LabeledSample parse_record(const nlohmann::json& record, const FeatureSpace& space) {
  if (!record.is_object()) {
    throw ParseError("record is not a JSON object");
  }
  for (const auto& [key, value] : record.items()) {
    (void)value;
    if (key != "id" && key != "label" && key != "bics") {
      throw ParseError("unknown field '" + key + "'");
    }
  }
  if (!record.contains("id") || !record["id"].is_string()) {
    throw ParseError("missing or non-string 'id'");
  }
  if (!record.contains("label")) {
    throw ParseError("missing 'label'");
  }
  if (!record.contains("bics") || !record["bics"].is_array()) {
    throw ParseError("missing or non-array 'bics'");
  }

  LabeledSample sample;
  sample.id = record["id"].get<std::string>();

  const auto& label = record["label"];
  if (label.is_null()) {
    sample.label = std::nullopt;
  } else if (label.is_number_integer()) {
    const auto value = label.get<std::int64_t>();
    if (value != 0 && value != 1) {
      throw ParseError("label must be 0, 1 or null");
    }
    sample.label = label_from_int(static_cast<int>(value));
  } else {
    throw ParseError("label must be 0, 1 or null");
  }

  sample.bics.reserve(record["bics"].size());
  for (const auto& item : record["bics"]) {
    if (!item.is_number_integer()) {
      throw ParseError("BIC index is not an integer");
    }
    const auto value = item.get<std::int64_t>();
    if (value < 0 || value > std::numeric_limits<std::uint32_t>::max()) {
      throw ParseError("BIC index " + std::to_string(value) + " out of range");
    }
    sample.bics.push_back(static_cast<std::uint32_t>(value));
  }

  validate_sample(sample, space);
  return sample;
}

}  // namespace

DailyBatch parse_daily_file(std::istream& in, const FeatureSpace& space,
                            const std::string& source_name) {
  DailyBatch batch;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) {
      throw ParseError(source_name, line_number, "empty line");
    }
    const auto record = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded()) {
      throw ParseError(source_name, line_number, "malformed JSON record");
    }
    try {
      batch.samples.push_back(parse_record(record, space));
    } catch (const ParseError& e) {
      throw ParseError(source_name, line_number, e.what());
    }
    if (!seen_ids.insert(batch.samples.back().id).second) {
      throw ParseError(source_name, line_number,
                       "duplicate sample id '" + batch.samples.back().id + "'");
    }
  }
  if (in.bad()) {
    throw ParseError(source_name, line_number, "read failure");
  }
  return batch;
}

void write_daily_file(const DailyBatch& batch, std::ostream& out) {
  for (const auto& sample : batch.samples) {
    nlohmann::ordered_json record;
    record["id"] = sample.id;
    if (sample.label.has_value()) {
      record["label"] = label_value(*sample.label);
    } else {
      record["label"] = nullptr;
    }
    record["bics"] = sample.bics;
    out << record.dump() << '\n';
  }
}

DailyBatch load_daily_file(const std::filesystem::path& file, const FeatureSpace& space) {
  std::ifstream in(file);
  if (!in) {
    throw ParseError("cannot open " + file.string());
  }
  DailyBatch batch = parse_daily_file(in, space, file.filename().string());
  batch.day = file.stem().string();
  return batch;
}

void save_daily_file(const DailyBatch& batch, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) {
    throw ParseError("cannot open " + file.string() + " for writing");
  }
  write_daily_file(batch, out);
  out.flush();
  if (!out) {
    throw ParseError("write failure on " + file.string());
  }
}

std::vector<std::filesystem::path> list_daily_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(dir)) {
    throw ParseError("not a directory: " + dir.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  return files;
}

FeatureSpace read_meta(const std::filesystem::path& dir) {
  const auto file = dir / "meta.json";
  std::ifstream in(file);
  if (!in) {
    throw ParseError("cannot open " + file.string());
  }
  const auto meta = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (meta.is_discarded() || !meta.is_object() || !meta.contains("m_count") ||
      !meta["m_count"].is_number_integer()) {
    throw ParseError("malformed meta.json in " + dir.string());
  }
  const auto m_count = meta["m_count"].get<std::int64_t>();
  if (m_count < 1 || m_count > std::numeric_limits<std::uint32_t>::max()) {
    throw ParseError("meta.json m_count out of range: " + std::to_string(m_count));
  }
  return FeatureSpace{static_cast<std::uint32_t>(m_count)};
}

void write_meta(const FeatureSpace& space, const std::filesystem::path& dir) {
  std::ofstream out(dir / "meta.json");
  if (!out) {
    throw ParseError("cannot open " + (dir / "meta.json").string() + " for writing");
  }
  nlohmann::ordered_json meta;
  meta["m_count"] = space.m_count;
  out << meta.dump() << '\n';
}

std::vector<std::uint8_t> dense_vector(const LabeledSample& sample, const FeatureSpace& space) {
  std::vector<std::uint8_t> dense(space.m_count, 0);
  for (const auto index : sample.bics) {
    dense.at(index) = 1;
  }
  return dense;
}

}  // namespace bictriage
