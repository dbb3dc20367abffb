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
#include <span>
#include <vector>

#include "bictriage/rational.hpp"
#include "bictriage/sample.hpp"

namespace bictriage {

/// Per-BIC counters of the BIC-as-classifier view: t_m counts triggers from
/// MALICIOUS samples (the BIC's true positives), f_m triggers from BENIGN
/// samples (its false positives).
struct MpCounters {
  std::vector<std::int64_t> t;
  std::vector<std::int64_t> f;

  explicit MpCounters(std::uint32_t m_count = 0);

  std::uint32_t m_count() const { return static_cast<std::uint32_t>(t.size()); }

  /// t_m += label, f_m += 1-label for each triggered m; O(|bics|).
  /// Throws on unlabeled input.
  void add(const LabeledSample& sample);

  bool operator==(const MpCounters&) const = default;
};

MpCounters merge(const MpCounters& a, const MpCounters& b);

/// Precision scores S_m = t/(t+f). A never-triggered BIC scores 0: an
/// indicator never seen in training carries no evidence.
std::vector<double> compute_scores(const MpCounters& counters);

/// Highest-scoring triggered BIC; ties resolve to the lowest index;
/// nullopt when the sample triggered nothing.
std::optional<std::uint32_t> select_bic(std::span<const double> scores,
                                        const LabeledSample& sample);

enum class RescoreMode {
  snapshot,      // select/classify against scores frozen at pass entry
  incremental,   // re-derive scores from the mutating counters mid-pass
};

/// One ordered pass over the training samples: a false positive on the
/// selected BIC swaps one count t->f, a false negative swaps one count
/// f->t, guarded so counters never go negative. Each swap preserves
/// t_m + f_m. Samples with no triggered BIC are skipped. Returns the
/// updated counters; the input stays untouched and (in snapshot mode)
/// provides the frozen scores.
MpCounters corrective_pass(const MpCounters& counters, const Rational& threshold,
                           std::span<const LabeledSample> samples,
                           RescoreMode mode = RescoreMode::snapshot);

struct MpModel {
  MpCounters counters;          // canonical state (post-corrective for MP2)
  std::vector<double> scores;   // = compute_scores(counters)
  Rational threshold;           // in (0,1)
  bool corrected = false;       // false = predictive only, true = + corrective
};

/// Rebuilds the derived score vector around the given counters.
MpModel make_mp_model(MpCounters counters, Rational threshold, bool corrected);

/// MALICIOUS iff the selected BIC's exact score t/(t+f) >= threshold.
/// Samples with no triggered BIC are BENIGN (surfaced upstream through an
/// empty-bics counter rather than hidden).
Label classify(const MpModel& model, const LabeledSample& sample);

/// The selected BIC's score, or 0 on empty bics; the value surfaced in
/// classification reports.
double max_triggered_score(const MpModel& model, const LabeledSample& sample);

/// The grid value minimizing training errors under score-threshold
/// classification; ties go to the largest threshold. Per-sample max scores
/// are sorted once, then each grid value costs one binary search.
Rational fit_threshold(const MpCounters& counters, std::span<const LabeledSample> samples,
                       std::span<const Rational> grid);

/// 0.001 steps over [0.5, 0.999]; includes the 0.99 default.
std::vector<Rational> default_threshold_grid();

struct MpConfig {
  std::optional<Rational> threshold = Rational{99, 100};   // nullopt = grid search
  std::vector<Rational> grid;                              // empty = default grid
  bool corrected = false;
  RescoreMode rescore = RescoreMode::snapshot;
};

/// Predictive step (counter accumulation + precision scores), optional
/// threshold search, optional corrective pass with a final rescore.
MpModel fit_mp(std::span<const LabeledSample> samples, const FeatureSpace& space,
               const MpConfig& config);

}  // namespace bictriage
