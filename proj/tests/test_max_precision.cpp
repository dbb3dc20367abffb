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

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "bictriage/max_precision.hpp"
#include "bictriage/metrics.hpp"
#include "testutil.hpp"

using namespace bictriage;

namespace {

MpCounters counters_of(std::span<const LabeledSample> samples, std::uint32_t m_count) {
  MpCounters counters(m_count);
  for (const auto& s : samples) {
    counters.add(s);
  }
  return counters;
}

MpCounters counters_from(std::vector<std::int64_t> t, std::vector<std::int64_t> f) {
  MpCounters counters(static_cast<std::uint32_t>(t.size()));
  counters.t = std::move(t);
  counters.f = std::move(f);
  return counters;
}

std::int64_t trigger_mass(const MpCounters& c) {
  return std::accumulate(c.t.begin(), c.t.end(), std::int64_t{0}) +
         std::accumulate(c.f.begin(), c.f.end(), std::int64_t{0});
}

// O(N * |grid|) reference recount for threshold search.
std::int64_t errors_at(const MpCounters& counters, std::span<const LabeledSample> samples,
                       const Rational& threshold) {
  const auto scores = compute_scores(counters);
  std::int64_t errors = 0;
  for (const auto& s : samples) {
    const auto selected = select_bic(scores, s);
    const bool malicious =
        selected.has_value() &&
        score_at_least(counters.t[*selected], counters.f[*selected], threshold);
    if (malicious != (*s.label == Label::malicious)) {
      ++errors;
    }
  }
  return errors;
}

}  // namespace

TEST_CASE("accumulate routes triggers by label") {
  MpCounters counters(4);
  counters.add(testutil::sample("a", {3}, 1));
  CHECK(counters.t == std::vector<std::int64_t>{0, 0, 0, 1});
  CHECK(counters.f == std::vector<std::int64_t>{0, 0, 0, 0});
  counters.add(testutil::sample("b", {3}, 0));
  CHECK(counters.t[3] == 1);
  CHECK(counters.f[3] == 1);
  CHECK_THROWS_AS(counters.add(testutil::unlabeled("u", {0})), std::invalid_argument);
}

TEST_CASE("accumulation is order and partition independent") {
  std::mt19937_64 rng(5);
  const auto samples = testutil::random_instance(rng, 60, 10);
  const auto whole = counters_of(samples, 10);

  auto shuffled = samples;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(counters_of(shuffled, 10) == whole);

  const auto left = counters_of(std::span(samples).subspan(0, 25), 10);
  const auto right = counters_of(std::span(samples).subspan(25), 10);
  CHECK(merge(left, right) == whole);
  CHECK(merge(right, left) == whole);
  CHECK(merge(whole, MpCounters(10)) == whole);
}

TEST_CASE("precision scores") {
  const auto counters = counters_from({99, 0, 0}, {1, 5, 0});
  const auto scores = compute_scores(counters);
  CHECK(scores[0] == 0.99);
  CHECK(scores[1] == 0.0);
  CHECK(scores[2] == 0.0);
}

TEST_CASE("select_bic takes the highest scoring triggered BIC") {
  const std::vector<double> scores = {0.1, 0.0, 0.7, 0.0, 0.0, 0.95};
  CHECK(select_bic(scores, testutil::unlabeled("a", {2, 5})) == 5u);
  CHECK(select_bic(scores, testutil::unlabeled("b", {2})) == 2u);
  CHECK_FALSE(select_bic(scores, testutil::unlabeled("c", {})).has_value());

  const std::vector<double> tied = {0.0, 0.9, 0.0, 0.9};
  CHECK(select_bic(tied, testutil::unlabeled("d", {1, 3})) == 1u);
}

TEST_CASE("classification compares the selected score exactly") {
  const auto threshold = Rational::parse("0.99");
  const auto at_boundary = make_mp_model(counters_from({99}, {1}), threshold, false);
  CHECK(classify(at_boundary, testutil::unlabeled("a", {0})) == Label::malicious);

  const auto below = make_mp_model(counters_from({989}, {11}), threshold, false);
  CHECK(classify(below, testutil::unlabeled("b", {0})) == Label::benign);

  CHECK(classify(at_boundary, testutil::unlabeled("c", {})) == Label::benign);
  CHECK(max_triggered_score(at_boundary, testutil::unlabeled("c", {})) == 0.0);
  CHECK(max_triggered_score(at_boundary, testutil::unlabeled("d", {0})) == 0.99);
}

TEST_CASE("raising the threshold only flips predictions to BENIGN") {
  std::mt19937_64 rng(7);
  const auto samples = testutil::random_instance(rng, 50, 8);
  const auto counters = counters_of(samples, 8);
  const auto probes = testutil::random_instance(rng, 40, 8);
  const std::vector<Rational> ladder = {Rational::parse("0.5"), Rational::parse("0.7"),
                                        Rational::parse("0.9"), Rational::parse("0.99")};
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    const auto low = make_mp_model(counters, ladder[i - 1], false);
    const auto high = make_mp_model(counters, ladder[i], false);
    for (const auto& probe : probes) {
      if (classify(high, probe) == Label::malicious) {
        CHECK(classify(low, probe) == Label::malicious);
      }
    }
  }
}

TEST_CASE("argmax selection is invariant under positive scaling") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int round = 0; round < 30; ++round) {
    std::vector<double> scores(12);
    for (auto& s : scores) {
      s = unit(rng);
    }
    const auto probe = testutil::random_instance(rng, 1, 12, 0.5)[0];
    const double c = 0.05 + 0.95 * unit(rng);
    std::vector<double> scaled = scores;
    for (auto& s : scaled) {
      s *= c;
    }
    CHECK(select_bic(scores, probe) == select_bic(scaled, probe));
  }
}

TEST_CASE("fit_threshold minimizes training errors on the grid") {
  SUBCASE("three-sample instance from constructed counters") {
    // S = {0.99, 0.95, 0.85}.
    const auto counters = counters_from({99, 19, 17}, {1, 1, 3});
    const std::vector<LabeledSample> samples = {testutil::sample("a", {0}, 1),
                                                testutil::sample("b", {1}, 1),
                                                testutil::sample("c", {2}, 0)};
    const std::vector<Rational> grid = {Rational::parse("0.5"), Rational::parse("0.9"),
                                        Rational::parse("0.999")};
    const auto best = fit_threshold(counters, samples, grid);
    CHECK(best == Rational::parse("0.9"));
    CHECK(errors_at(counters, samples, best) == 0);
  }
  SUBCASE("single benign sample prefers the excluding threshold") {
    const auto counters = counters_from({7}, {3});   // S = 0.7
    const std::vector<LabeledSample> samples = {testutil::sample("a", {0}, 0)};
    const std::vector<Rational> grid = {Rational::parse("0.6"), Rational::parse("0.8")};
    CHECK(fit_threshold(counters, samples, grid) == Rational::parse("0.8"));
  }
  SUBCASE("ties break toward the largest threshold") {
    const auto counters = counters_from({5}, {0});   // S = 1.0 >= every grid value
    const std::vector<LabeledSample> samples = {testutil::sample("a", {0}, 1),
                                                testutil::sample("b", {0}, 1),
                                                testutil::sample("c", {0}, 1)};
    const std::vector<Rational> grid = {Rational::parse("0.5"), Rational::parse("0.99")};
    CHECK(fit_threshold(counters, samples, grid) == Rational::parse("0.99"));
  }
  SUBCASE("empty grid and empty sample set are rejected") {
    const auto counters = counters_from({1}, {1});
    const std::vector<LabeledSample> samples = {testutil::sample("a", {0}, 1)};
    CHECK_THROWS_AS(fit_threshold(counters, samples, {}), std::invalid_argument);
    const auto grid = default_threshold_grid();
    CHECK_THROWS_AS(fit_threshold(counters, {}, grid), std::invalid_argument);
  }
}

TEST_CASE("fit_threshold matches an exhaustive recount on random instances") {
  std::mt19937_64 rng(13);
  const auto grid = default_threshold_grid();
  for (int round = 0; round < 25; ++round) {
    const std::uint32_t m_count = 2 + static_cast<std::uint32_t>(rng() % 8);
    const auto train = testutil::random_instance(rng, 5 + rng() % 96, m_count, 0.3);
    const auto counters = counters_of(train, m_count);
    const auto best = fit_threshold(counters, train, grid);
    const auto best_errors = errors_at(counters, train, best);
    for (const auto& candidate : grid) {
      CHECK(best_errors <= errors_at(counters, train, candidate));
    }
  }
}

TEST_CASE("default grid covers [0.5, 0.999] in 0.001 steps") {
  const auto grid = default_threshold_grid();
  CHECK(grid.size() == 500);
  CHECK(grid.front() == Rational{1, 2});
  CHECK(grid.back() == Rational{999, 1000});
  CHECK(std::find(grid.begin(), grid.end(), Rational{99, 100}) != grid.end());
}

TEST_CASE("corrective pass penalty rules") {
  const auto threshold = Rational::parse("0.99");

  SUBCASE("false positive swaps one count from t to f") {
    const auto counters = counters_from({99}, {1});
    const std::vector<LabeledSample> samples = {testutil::sample("a", {0}, 0)};
    const auto updated = corrective_pass(counters, threshold, samples);
    CHECK(updated.t[0] == 98);
    CHECK(updated.f[0] == 2);
    CHECK(compute_scores(updated)[0] == 0.98);
  }
  SUBCASE("false negative swaps one count from f to t") {
    const auto counters = counters_from({1}, {9});
    const std::vector<LabeledSample> samples = {testutil::sample("a", {0}, 1)};
    const auto updated = corrective_pass(counters, threshold, samples);
    CHECK(updated.t[0] == 2);
    CHECK(updated.f[0] == 8);
  }
  SUBCASE("correct classifications leave counters untouched") {
    const auto counters = counters_from({99, 1}, {1, 9});
    const std::vector<LabeledSample> samples = {testutil::sample("a", {0}, 1),
                                                testutil::sample("b", {1}, 0)};
    CHECK(corrective_pass(counters, threshold, samples) == counters);
  }
  SUBCASE("guards stop swaps at zero") {
    const auto no_tp = counters_from({0}, {10});
    // Classified benign with Y=1 fires the swap only while f > 0.
    const std::vector<LabeledSample> squeeze(12, testutil::sample("a", {0}, 1));
    const auto updated = corrective_pass(no_tp, threshold, squeeze);
    CHECK(updated.t[0] >= 0);
    CHECK(updated.f[0] >= 0);
    CHECK(updated.t[0] + updated.f[0] == 10);
  }
  SUBCASE("empty-bics samples are skipped") {
    const auto counters = counters_from({5}, {5});
    const std::vector<LabeledSample> samples = {testutil::sample("a", {}, 1)};
    CHECK(corrective_pass(counters, threshold, samples) == counters);
  }
}

TEST_CASE("snapshot and incremental rescoring differ once counters move") {
  const auto threshold = Rational::parse("0.99");
  const auto counters = counters_from({99}, {1});
  const std::vector<LabeledSample> two_benign = {testutil::sample("a", {0}, 0),
                                                 testutil::sample("b", {0}, 0)};
  // Snapshot: both samples see the frozen 0.99 and both fire the penalty.
  const auto snap = corrective_pass(counters, threshold, two_benign, RescoreMode::snapshot);
  CHECK(snap.t[0] == 97);
  CHECK(snap.f[0] == 3);
  // Incremental: the first penalty drops the live score to 0.98 < T, so the
  // second sample is already classified BENIGN.
  const auto incr = corrective_pass(counters, threshold, two_benign, RescoreMode::incremental);
  CHECK(incr.t[0] == 98);
  CHECK(incr.f[0] == 2);
}

TEST_CASE("corrective pass conserves trigger mass and never goes negative") {
  std::mt19937_64 rng(17);
  for (int round = 0; round < 100; ++round) {
    const std::uint32_t m_count = 2 + static_cast<std::uint32_t>(rng() % 10);
    const auto train = testutil::random_instance(rng, 10 + rng() % 60, m_count, 0.3);
    const auto counters = counters_of(train, m_count);
    const auto threshold = Rational::of(1 + static_cast<std::int64_t>(rng() % 999), 1000);
    const auto mode = round % 2 == 0 ? RescoreMode::snapshot : RescoreMode::incremental;
    const auto updated = corrective_pass(counters, threshold, train, mode);
    for (std::uint32_t m = 0; m < m_count; ++m) {
      CHECK(updated.t[m] >= 0);
      CHECK(updated.f[m] >= 0);
      CHECK(updated.t[m] + updated.f[m] == counters.t[m] + counters.f[m]);
    }
    CHECK(trigger_mass(updated) == trigger_mass(counters));
  }
}

TEST_CASE("fit assembles the predictive and corrective phases") {
  std::vector<LabeledSample> train;
  for (int i = 0; i < 99; ++i) {
    train.push_back(testutil::sample("m" + std::to_string(i), {0}, 1));
  }
  train.push_back(testutil::sample("b0", {0}, 0));
  const FeatureSpace space{1};

  MpConfig mp1;
  mp1.threshold = Rational::parse("0.99");
  const auto predictive = fit_mp(train, space, mp1);
  CHECK(predictive.scores[0] == 0.99);
  CHECK_FALSE(predictive.corrected);

  MpConfig mp2 = mp1;
  mp2.corrected = true;
  const auto corrected = fit_mp(train, space, mp2);
  CHECK(corrected.counters.t[0] == 98);
  CHECK(corrected.counters.f[0] == 2);
  CHECK(corrected.scores[0] == 0.98);
  CHECK(corrected.corrected);
}

TEST_CASE("a clean predictive fit is untouched by the corrective pass") {
  std::vector<LabeledSample> train;
  for (int i = 0; i < 10; ++i) {
    train.push_back(testutil::sample("m" + std::to_string(i), {0}, 1));
    train.push_back(testutil::sample("b" + std::to_string(i), {1}, 0));
  }
  MpConfig mp1;
  mp1.threshold = Rational::parse("0.99");
  MpConfig mp2 = mp1;
  mp2.corrected = true;
  const auto predictive = fit_mp(train, FeatureSpace{2}, mp1);
  const auto corrected = fit_mp(train, FeatureSpace{2}, mp2);
  CHECK(predictive.counters == corrected.counters);
  CHECK(predictive.scores == corrected.scores);
}

TEST_CASE("fit validates its inputs") {
  const FeatureSpace space{2};
  CHECK_THROWS_AS(fit_mp({}, space, MpConfig{}), std::invalid_argument);
  MpConfig bad;
  bad.threshold = Rational{3, 2};
  const std::vector<LabeledSample> train = {testutil::sample("a", {0}, 1)};
  CHECK_THROWS_AS(fit_mp(train, space, bad), std::invalid_argument);
}

TEST_CASE("MP1 scores equal the per-BIC classifier PPV") {
  std::mt19937_64 rng(19);
  const std::uint32_t m_count = 12;
  const auto train = testutil::random_instance(rng, 200, m_count, 0.2);
  const auto counters = counters_of(train, m_count);
  const auto scores = compute_scores(counters);
  for (std::uint32_t m = 0; m < m_count; ++m) {
    ConfusionCounts counts;
    for (const auto& s : train) {
      const bool triggered = std::binary_search(s.bics.begin(), s.bics.end(), m);
      counts.add(triggered ? Label::malicious : Label::benign, *s.label);
    }
    const auto ppv = compute_metrics(counts).ppv;
    if (ppv.has_value()) {
      CHECK(scores[m] == doctest::Approx(*ppv).epsilon(1e-15));
    } else {
      CHECK(scores[m] == 0.0);
    }
  }
}
