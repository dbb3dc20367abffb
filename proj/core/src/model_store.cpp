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

#include "bictriage/model_store.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bictriage {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 14695981039346656037ull;
  for (const unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

namespace {

std::string hex16(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(value));
  return std::string(buffer, 16);
}

// Canonical payload bytes: the record without its checksum field, dumped
// with sorted keys so field order in the file never affects the digest.
std::string checksum_of(const nlohmann::json& record) {
  nlohmann::json canonical = record;
  canonical.erase("checksum");
  return hex16(fnv1a64(canonical.dump()));
}

std::string finish(nlohmann::ordered_json record) {
  record["checksum"] = checksum_of(record);
  return record.dump();
}

void require(bool condition, const std::string& message) {
  if (!condition) {
    throw ModelIoError(message);
  }
}

}  // namespace

std::string serialize_model(const LogRegModel& model) {
  require(model.weights.size() == model.dimension(), "weight length mismatch");
  for (const double w : model.weights) {
    require(std::isfinite(w), "non-finite weight");
  }
  nlohmann::ordered_json record;
  record["format"] = "logreg/1";
  record["m_count"] = model.m_count;
  record["intercept"] = model.intercept;
  record["weights"] = model.weights;
  return finish(std::move(record));
}

std::string serialize_model(const NbCounters& counters) {
  nlohmann::ordered_json record;
  record["format"] = "nb/1";
  record["m_count"] = counters.m_count;
  record["n_km"] = {counters.n_km[0], counters.n_km[1]};
  record["class_totals"] = {counters.class_total[0], counters.class_total[1]};
  return finish(std::move(record));
}

std::string serialize_model(const MpModel& model) {
  nlohmann::ordered_json record;
  record["format"] = "mp/1";
  record["m_count"] = model.counters.m_count();
  record["t"] = model.counters.t;
  record["f"] = model.counters.f;
  record["threshold"] = model.threshold.str();
  record["corrected"] = model.corrected;
  return finish(std::move(record));
}

std::string serialize_model(const StoredModel& model) {
  return std::visit([](const auto& payload) { return serialize_model(payload); }, model);
}

namespace {

LogRegModel parse_logreg(const nlohmann::json& record) {
  LogRegModel model;
  model.m_count = record.at("m_count").get<std::uint32_t>();
  model.intercept = record.at("intercept").get<bool>();
  model.weights = record.at("weights").get<std::vector<double>>();
  require(model.weights.size() == model.dimension(), "weight length mismatch");
  for (const double w : model.weights) {
    require(std::isfinite(w), "non-finite weight");
  }
  return model;
}

NbCounters parse_nb(const nlohmann::json& record) {
  const auto m_count = record.at("m_count").get<std::uint32_t>();
  NbCounters counters(m_count);
  const auto& n_km = record.at("n_km");
  require(n_km.is_array() && n_km.size() == 2, "n_km must hold two class rows");
  counters.n_km[0] = n_km[0].get<std::vector<std::int64_t>>();
  counters.n_km[1] = n_km[1].get<std::vector<std::int64_t>>();
  const auto totals = record.at("class_totals").get<std::vector<std::int64_t>>();
  require(totals.size() == 2, "class_totals must hold two entries");
  counters.class_total = {totals[0], totals[1]};
  counters.total = totals[0] + totals[1];
  for (int k = 0; k < 2; ++k) {
    require(counters.n_km[k].size() == m_count, "n_km length mismatch");
    require(counters.class_total[k] >= 0, "negative class total");
    for (const auto n : counters.n_km[k]) {
      require(n >= 0 && n <= counters.class_total[k], "counter exceeds class total");
    }
  }
  return counters;
}

MpModel parse_mp(const nlohmann::json& record) {
  const auto m_count = record.at("m_count").get<std::uint32_t>();
  MpCounters counters(m_count);
  counters.t = record.at("t").get<std::vector<std::int64_t>>();
  counters.f = record.at("f").get<std::vector<std::int64_t>>();
  require(counters.t.size() == m_count && counters.f.size() == m_count,
          "counter length mismatch");
  for (std::uint32_t m = 0; m < m_count; ++m) {
    require(counters.t[m] >= 0 && counters.f[m] >= 0, "negative counter");
  }
  const auto threshold = Rational::parse(record.at("threshold").get<std::string>());
  const auto corrected = record.at("corrected").get<bool>();
  return make_mp_model(std::move(counters), threshold, corrected);
}

}  // namespace

StoredModel deserialize_model(const std::string& text) {
  const auto record = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  require(!record.is_discarded() && record.is_object(), "malformed model envelope");
  require(record.contains("format") && record["format"].is_string(), "missing format tag");
  require(record.contains("checksum") && record["checksum"].is_string(), "missing checksum");
  const auto stored_checksum = record["checksum"].get<std::string>();
  require(stored_checksum == checksum_of(record),
          "checksum mismatch: the model file is corrupt");

  const auto format = record["format"].get<std::string>();
  try {
    if (format == "logreg/1") {
      return parse_logreg(record);
    }
    if (format == "nb/1") {
      return parse_nb(record);
    }
    if (format == "mp/1") {
      return parse_mp(record);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ModelIoError(std::string("malformed ") + format + " payload: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelIoError(std::string("malformed ") + format + " payload: " + e.what());
  }
  throw ModelIoError("unknown model format '" + format + "'");
}

void save_model(const StoredModel& model, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) {
    throw ModelIoError("cannot open " + file.string() + " for writing");
  }
  out << serialize_model(model) << '\n';
  out.flush();
  if (!out) {
    throw ModelIoError("write failure on " + file.string());
  }
}

StoredModel load_model(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw ModelIoError("cannot open " + file.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_model(buffer.str());
}

std::uint32_t model_m_count(const StoredModel& model) {
  if (const auto* lr = std::get_if<LogRegModel>(&model)) {
    return lr->m_count;
  }
  if (const auto* nb = std::get_if<NbCounters>(&model)) {
    return nb->m_count;
  }
  return std::get<MpModel>(model).counters.m_count();
}

std::string_view model_format(const StoredModel& model) {
  if (std::holds_alternative<LogRegModel>(model)) {
    return "logreg/1";
  }
  if (std::holds_alternative<NbCounters>(model)) {
    return "nb/1";
  }
  return "mp/1";
}

}  // namespace bictriage
