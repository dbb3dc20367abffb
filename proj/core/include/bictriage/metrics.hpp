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
#include <optional>

#include "bictriage/sample.hpp"

namespace bictriage {

/// Exact integer confusion counters. Accumulation is single-writer;
/// cross-thread aggregation goes through merge().
struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  void add(Label prediction, Label truth);
  std::int64_t total() const { return tp + tn + fp + fn; }

  bool operator==(const ConfusionCounts&) const = default;
};

/// Component-wise sum; associative and commutative with identity {0,0,0,0}.
ConfusionCounts merge(const ConfusionCounts& a, const ConfusionCounts& b);

/// The five evaluation metrics. A metric whose denominator is zero is
/// undefined, never 0 or 1; undefined values stay out of macro averages.
struct MetricsReport {
  std::optional<double> ppv;   // tp / (tp + fp)
  std::optional<double> npv;   // tn / (tn + fn)
  std::optional<double> sns;   // tp / (tp + fn)
  std::optional<double> spc;   // tn / (tn + fp)
  std::optional<double> acc;   // (tp + tn) / total

  bool operator==(const MetricsReport&) const = default;
};

MetricsReport compute_metrics(const ConfusionCounts& counts);

}  // namespace bictriage
