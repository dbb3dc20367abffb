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
#include <string>
#include <vector>

#include "bictriage/sample.hpp"

namespace bictriage {

/// Bernoulli generative model with class-conditional BIC triggers:
/// Y ~ Bernoulli(prior_malicious), then x_m ~ Bernoulli(a_m) for malicious
/// samples and Bernoulli(b_m) for benign ones, independently per BIC.
struct GeneratorSpec {
  std::uint32_t m_count = 0;
  double prior_malicious = 0.5;
  std::vector<double> trigger_prob_malicious;   // a_m, length m_count
  std::vector<double> trigger_prob_benign;      // b_m, length m_count
  std::uint32_t samples_per_day = 0;
  std::uint32_t days = 0;
  std::uint64_t seed = 0;
  /// When > 0, each odd BIC j copies BIC j-1's draw with this probability
  /// instead of drawing its own, breaking the independence assumption.
  double correlated_rho = 0.0;
};

/// Throws std::invalid_argument when the spec violates its invariants.
void validate_spec(const GeneratorSpec& spec);

/// splitmix64 bit mixer; the seed/id scheme below is built from it.
std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic generation contract, fixed so independent implementations
/// agree bit for bit:
///   stream   = std::mt19937_64 seeded with splitmix64(seed) ^ splitmix64(day_index + 1)
///   unit draw u = (stream() >> 11) * 2^-53, in [0,1)
///   per sample: label draw first (u < prior), then BICs in ascending index
///   order (u < a_m or b_m); with correlated_rho > 0 each odd BIC first
///   draws u_copy and copies its left neighbour when u_copy < rho.
///   sample id = 16 hex digits of splitmix64(splitmix64(seed ^ day_index) ^ ordinal),
///   unique within a day because splitmix64 is a bijection.
DailyBatch generate_day(const GeneratorSpec& spec, std::uint32_t day_index,
                        const std::string& day_name);

/// Population precision of BIC m: pi*a / (pi*a + (1-pi)*b), with the
/// correlated-copy option folded into the per-class marginals so the value
/// stays exact for any rho. Throws when the BIC can never trigger.
double analytic_precision(const GeneratorSpec& spec, std::uint32_t m);

/// Effective per-class marginal trigger probabilities (equal to a_m/b_m
/// except for odd BICs under correlated_rho > 0).
double marginal_trigger_prob(const GeneratorSpec& spec, std::uint32_t m, Label k);

/// Desk-scale default profile: 256 BICs, prior 0.32, 5000 samples/day,
/// 30 days. BICs 0 and 1 are planted at precisions 0.995 and 0.985,
/// straddling the 0.99 default threshold; the remaining BICs draw seeded
/// malicious-leaning, benign-leaning or noise roles.
GeneratorSpec default_profile(std::uint64_t seed = 1, std::uint32_t m_count = 256,
                              double prior = 0.32, std::uint32_t samples_per_day = 5000,
                              std::uint32_t days = 30);

/// "YYYY-MM-DD" for start_date + day_offset days (proleptic Gregorian).
std::string date_string(const std::string& start_date, std::uint32_t day_offset);

/// Writes <dir>/YYYY-MM-DD.jsonl for each day starting at start_date, the
/// meta.json sidecar, and a generator.json provenance record.
void write_dataset(const GeneratorSpec& spec, const std::filesystem::path& dir,
                   const std::string& start_date = "2024-01-01");

GeneratorSpec load_generator_spec(const std::filesystem::path& file);
void save_generator_spec(const GeneratorSpec& spec, const std::filesystem::path& file,
                         const std::string& start_date = "2024-01-01");

}  // namespace bictriage
