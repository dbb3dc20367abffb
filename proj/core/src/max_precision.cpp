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

#include "bictriage/max_precision.hpp"

#include <algorithm>
#include <stdexcept>

namespace bictriage {

MpCounters::MpCounters(std::uint32_t m_count) : t(m_count, 0), f(m_count, 0) {}

void MpCounters::add(const LabeledSample& sample) {
  if (!sample.label.has_value()) {
    throw std::invalid_argument("unlabeled sample '" + sample.id + "' in training set");
  }
  const int y = label_value(*sample.label);
  for (const auto m : sample.bics) {
    t[m] += y;
    f[m] += 1 - y;
  }
}

MpCounters merge(const MpCounters& a, const MpCounters& b) {
  if (a.m_count() != b.m_count()) {
    throw std::invalid_argument("counter shape mismatch");
  }
  MpCounters out(a.m_count());
  for (std::uint32_t m = 0; m < a.m_count(); ++m) {
    out.t[m] = a.t[m] + b.t[m];
    out.f[m] = a.f[m] + b.f[m];
  }
  return out;
}

std::vector<double> compute_scores(const MpCounters& counters) {
  std::vector<double> scores(counters.m_count(), 0.0);
  for (std::uint32_t m = 0; m < counters.m_count(); ++m) {
    const std::int64_t triggers = counters.t[m] + counters.f[m];
    if (triggers > 0) {
      scores[m] = static_cast<double>(counters.t[m]) / static_cast<double>(triggers);
    }
  }
  return scores;
}

std::optional<std::uint32_t> select_bic(std::span<const double> scores,
                                        const LabeledSample& sample) {
  std::optional<std::uint32_t> best;
  double best_score = 0.0;
  for (const auto m : sample.bics) {
    // Ascending iteration with strict > keeps the lowest index on ties.
    if (!best.has_value() || scores[m] > best_score) {
      best = m;
      best_score = scores[m];
    }
  }
  return best;
}

namespace {

// Selection and classification for the incremental rescore mode, derived
// from the live counters each step.
std::optional<std::uint32_t> select_bic_live(const MpCounters& counters,
                                             const LabeledSample& sample) {
  std::optional<std::uint32_t> best;
  for (const auto m : sample.bics) {
    if (!best.has_value() ||
        compare_scores(counters.t[m], counters.f[m], counters.t[*best], counters.f[*best]) > 0) {
      best = m;
    }
  }
  return best;
}

}  // namespace

MpCounters corrective_pass(const MpCounters& counters, const Rational& threshold,
                           std::span<const LabeledSample> samples, RescoreMode mode) {
  const std::vector<double> frozen = compute_scores(counters);
  MpCounters live = counters;
  for (const auto& sample : samples) {
    if (!sample.label.has_value()) {
      throw std::invalid_argument("unlabeled sample '" + sample.id + "' in corrective pass");
    }
    const auto selected = mode == RescoreMode::snapshot ? select_bic(frozen, sample)
                                                        : select_bic_live(live, sample);
    if (!selected.has_value()) {
      continue;
    }
    const std::uint32_t m = *selected;
    const MpCounters& basis = mode == RescoreMode::snapshot ? counters : live;
    const bool predicted_malicious = score_at_least(basis.t[m], basis.f[m], threshold);
    const int y = label_value(*sample.label);
    if (predicted_malicious && y == 0 && live.t[m] > 0) {
      --live.t[m];
      ++live.f[m];
    } else if (!predicted_malicious && y == 1 && live.f[m] > 0) {
      ++live.t[m];
      --live.f[m];
    }
  }
  return live;
}

namespace {

void require_open_unit(const Rational& threshold) {
  if (threshold.num <= 0 || threshold.num >= threshold.den) {
    throw std::invalid_argument("threshold " + threshold.str() + " is not in (0,1)");
  }
}

}  // namespace

MpModel make_mp_model(MpCounters counters, Rational threshold, bool corrected) {
  require_open_unit(threshold);
  MpModel model;
  model.scores = compute_scores(counters);
  model.counters = std::move(counters);
  model.threshold = threshold;
  model.corrected = corrected;
  return model;
}

Label classify(const MpModel& model, const LabeledSample& sample) {
  const auto selected = select_bic(model.scores, sample);
  if (!selected.has_value()) {
    return Label::benign;
  }
  const std::uint32_t m = *selected;
  return score_at_least(model.counters.t[m], model.counters.f[m], model.threshold)
             ? Label::malicious
             : Label::benign;
}

double max_triggered_score(const MpModel& model, const LabeledSample& sample) {
  const auto selected = select_bic(model.scores, sample);
  return selected.has_value() ? model.scores[*selected] : 0.0;
}

Rational fit_threshold(const MpCounters& counters, std::span<const LabeledSample> samples,
                       std::span<const Rational> grid) {
  if (grid.empty()) {
    throw std::invalid_argument("empty threshold grid");
  }
  if (samples.empty()) {
    throw std::invalid_argument("empty training set for threshold search");
  }
  const std::vector<double> scores = compute_scores(counters);

  // Per-sample selected-BIC counter pair; samples with no triggered BIC get
  // the (0,1) sentinel, score 0, which no threshold in (0,1) reaches.
  struct Entry {
    std::int64_t t;
    std::int64_t f;
    bool positive;
  };
  std::vector<Entry> entries;
  entries.reserve(samples.size());
  std::int64_t total_positive = 0;
  for (const auto& sample : samples) {
    if (!sample.label.has_value()) {
      throw std::invalid_argument("unlabeled sample '" + sample.id + "' in threshold search");
    }
    const bool positive = *sample.label == Label::malicious;
    total_positive += positive ? 1 : 0;
    const auto selected = select_bic(scores, sample);
    if (selected.has_value()) {
      entries.push_back({counters.t[*selected], counters.f[*selected], positive});
    } else {
      entries.push_back({0, 1, positive});
    }
  }

  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return compare_scores(a.t, a.f, b.t, b.f) < 0;
  });
  // positives_below[i] = positives among the first i sorted entries.
  std::vector<std::int64_t> positives_below(entries.size() + 1, 0);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    positives_below[i + 1] = positives_below[i] + (entries[i].positive ? 1 : 0);
  }

  std::optional<Rational> best;
  std::int64_t best_errors = 0;
  for (const auto& candidate : grid) {
    require_open_unit(candidate);
    // First entry predicted malicious under this threshold.
    const auto it = std::partition_point(entries.begin(), entries.end(), [&](const Entry& e) {
      return !score_at_least(e.t, e.f, candidate);
    });
    const auto idx = static_cast<std::size_t>(it - entries.begin());
    const std::int64_t false_negatives = positives_below[idx];
    const std::int64_t predicted_positive = static_cast<std::int64_t>(entries.size() - idx);
    const std::int64_t true_positives = total_positive - false_negatives;
    const std::int64_t false_positives = predicted_positive - true_positives;
    const std::int64_t errors = false_negatives + false_positives;
    if (!best.has_value() || errors < best_errors ||
        (errors == best_errors && compare(*best, candidate) < 0)) {
      best = candidate;
      best_errors = errors;
    }
  }
  return *best;
}

std::vector<Rational> default_threshold_grid() {
  std::vector<Rational> grid;
  grid.reserve(500);
  for (std::int64_t i = 500; i <= 999; ++i) {
    grid.push_back(Rational::of(i, 1000));
  }
  return grid;
}

MpModel fit_mp(std::span<const LabeledSample> samples, const FeatureSpace& space,
               const MpConfig& config) {
  if (samples.empty()) {
    throw std::invalid_argument("empty training set");
  }
  MpCounters counters(space.m_count);
  for (const auto& sample : samples) {
    counters.add(sample);
  }
  Rational threshold;
  if (config.threshold.has_value()) {
    threshold = *config.threshold;
    require_open_unit(threshold);
  } else {
    const auto grid = config.grid.empty() ? default_threshold_grid() : config.grid;
    threshold = fit_threshold(counters, samples, grid);
  }
  if (config.corrected) {
    counters = corrective_pass(counters, threshold, samples, config.rescore);
  }
  return make_mp_model(std::move(counters), threshold, config.corrected);
}

}  // namespace bictriage
