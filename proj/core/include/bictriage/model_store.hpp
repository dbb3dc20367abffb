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
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "bictriage/logreg.hpp"
#include "bictriage/max_precision.hpp"
#include "bictriage/naive_bayes.hpp"

namespace bictriage {

/// Models persist as one-per-file JSON envelopes: a format tag ("logreg/1",
/// "nb/1", "mp/1"), m_count, the format-specific payload, and a checksum
/// over the canonical payload bytes. Where integer counters exist (NB, MP)
/// they are the canonical form and derived tables are recomputed on load,
/// so loaded models classify bit-identically on every input.
using StoredModel = std::variant<LogRegModel, NbCounters, MpModel>;

class ModelIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string serialize_model(const LogRegModel& model);
std::string serialize_model(const NbCounters& counters);
std::string serialize_model(const MpModel& model);
std::string serialize_model(const StoredModel& model);

/// Verifies the checksum, format tag and vector lengths; throws
/// ModelIoError on any mismatch.
StoredModel deserialize_model(const std::string& text);

void save_model(const StoredModel& model, const std::filesystem::path& file);
StoredModel load_model(const std::filesystem::path& file);

std::uint32_t model_m_count(const StoredModel& model);
std::string_view model_format(const StoredModel& model);

/// FNV-1a 64-bit digest used for envelope integrity.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace bictriage
