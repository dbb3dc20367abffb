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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "bictriage/sample.hpp"

namespace bictriage {

/// Per-class trigger counters; the canonical (serialized) training state.
/// Training is one linear pass: counters are mergeable across shards and
/// across days, and the smoothed tables derive from them deterministically.
struct NbCounters {
  std::uint32_t m_count = 0;
  std::array<std::vector<std::int64_t>, 2> n_km;     // [class][bic]
  std::array<std::int64_t, 2> class_total = {0, 0};  // N_0, N_1
  std::int64_t total = 0;                            // N

  explicit NbCounters(std::uint32_t m_count = 0);

  /// Counts one labeled sample; cost O(|bics|). Throws on unlabeled input.
  void add(const LabeledSample& sample);

  bool operator==(const NbCounters&) const = default;
};

/// Component-wise sum; shapes must match.
NbCounters merge(const NbCounters& a, const NbCounters& b);

/// Laplace-smoothed log-probability tables. Smoothing keeps every p_km
/// strictly inside (0,1), so all table entries are finite; only the prior
/// of an empty class is -inf. The per-class bias precomputes
/// log_prior + sum_m log_q so scoring costs O(|bics|) instead of O(M).
struct NbModel {
  std::uint32_t m_count = 0;
  std::array<std::vector<double>, 2> log_p;   // log((n_km+1)/(N_k+2))
  std::array<std::vector<double>, 2> log_q;   // log(1 - (n_km+1)/(N_k+2))
  std::array<double, 2> log_prior = {0.0, 0.0};
  std::array<double, 2> bias = {0.0, 0.0};
};

/// Builds the model tables; requires at least one training sample.
NbModel finalize(const NbCounters& counters);

/// Class log-score, evaluated sparsely as
/// bias_k + sum over triggered m of (log_p - log_q); may be -inf when the
/// class prior is -inf.
double score(const NbModel& model, const LabeledSample& sample, Label k);

/// Argmax of the two class scores; exact ties go to MALICIOUS.
Label classify(const NbModel& model, const LabeledSample& sample);

}  // namespace bictriage
