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

#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bictriage/logreg.hpp"
#include "bictriage/max_precision.hpp"
#include "bictriage/metrics.hpp"
#include "bictriage/naive_bayes.hpp"

namespace bictriage {

enum class Method { lr, nb, mp1, mp2 };

std::string_view method_name(Method method);
std::optional<Method> parse_method(std::string_view name);
/// Parses "mp1,mp2,nb" style lists; throws std::invalid_argument on unknown
/// or duplicate names.
std::vector<Method> parse_method_list(std::string_view csv);

struct RunConfig {
  std::filesystem::path data_dir;
  std::vector<Method> methods = {Method::lr, Method::nb, Method::mp1, Method::mp2};
  /// nullopt = grid-search the threshold on each day's training window.
  std::optional<Rational> mp_threshold = Rational{99, 100};
  RescoreMode mp_rescore = RescoreMode::snapshot;
  /// Sliding window in days; absent = cumulative history.
  std::optional<int> window_days;
  SolverConfig lr_solver;
  bool lr_cold_start = false;   // refit from zero daily instead of warm starting
  int threads = 0;              // 0 = hardware concurrency
};

struct DayResult {
  std::string day;
  std::map<Method, ConfusionCounts> counts;
  std::map<Method, MetricsReport> metrics;
  std::int64_t train_size = 0;        // labeled samples in the training window
  std::int64_t test_size = 0;         // samples classified (labeled or not)
  std::int64_t empty_bics_count = 0;  // labeled test samples with no triggered BIC
  double train_seconds = 0.0;
  double classify_seconds = 0.0;
};

struct MethodAggregate {
  MetricsReport macro;    // mean of per-day metrics; undefined days excluded
  MetricsReport pooled;   // metrics of the summed confusion counts
  ConfusionCounts pooled_counts;
};

struct RunReport {
  std::vector<Method> methods;
  std::vector<DayResult> days;
  std::map<Method, MethodAggregate> aggregates;
};

/// Macro and pooled averages side by side (the two readings of an
/// "average over days" disagree whenever day sizes differ).
std::map<Method, MethodAggregate> aggregate(std::span<const DayResult> days,
                                            std::span<const Method> methods);

/// Day-by-day driver for the rolling protocol. Exposed so callers (and the
/// test suite) can audit the streaming training state between days.
///
/// NB/MP counters are maintained incrementally — days add in when sealed
/// and subtract out when they leave the window — and at every day equal
/// batch-built counters over the window exactly (integer arithmetic).
/// The MP2 corrective pass and LR refits consume the stored window samples
/// in chronological order each day; these are the O(history) steps.
class RollingEvaluator {
 public:
  RollingEvaluator(RunConfig config, FeatureSpace space, std::vector<DailyBatch> batches);

  bool done() const { return next_day_ >= batches_.size(); }

  /// Evaluates the next pending day against the current training window,
  /// then absorbs it into training state. Day 0 never emits a result; it
  /// is absorbed at construction.
  DayResult evaluate_next_day();

  const NbCounters& nb_counters() const { return nb_counters_; }
  const MpCounters& mp_counters() const { return mp_counters_; }
  std::span<const double> lr_warm_weights() const { return lr_weights_; }
  const std::vector<DailyBatch>& batches() const { return batches_; }
  const FeatureSpace& space() const { return space_; }

 private:
  void absorb_day(std::size_t index);
  void trim_window();
  std::vector<LabeledSample> training_pool() const;
  bool wants(Method m) const;

  RunConfig config_;
  FeatureSpace space_;
  std::vector<DailyBatch> batches_;
  std::size_t next_day_ = 1;
  std::deque<std::size_t> window_;   // absorbed day indices, oldest first
  NbCounters nb_counters_;
  MpCounters mp_counters_;
  std::vector<double> lr_weights_;
};

/// Loads the dataset directory and runs the full protocol: for each day
/// after the first, train on the days before it, classify its samples,
/// seal the result. Deterministic: identical inputs give identical reports
/// regardless of thread count.
RunReport rolling_evaluate(const RunConfig& config);

}  // namespace bictriage
