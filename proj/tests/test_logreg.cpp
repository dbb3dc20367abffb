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

#include <cmath>
#include <random>

#include "bictriage/logreg.hpp"
#include "testutil.hpp"

using namespace bictriage;

namespace {

LogRegModel model_with_weights(std::uint32_t m_count, std::vector<double> weights,
                               double ridge_lambda = 0.0, bool intercept = false) {
  LogRegModel model;
  model.m_count = m_count;
  model.intercept = intercept;
  model.config.ridge_lambda = ridge_lambda;
  model.config.intercept = intercept;
  model.weights = std::move(weights);
  return model;
}

double nll_at(const LogRegModel& base, std::span<const LabeledSample> samples,
              const std::vector<double>& weights) {
  LogRegModel probe = base;
  probe.weights = weights;
  return nll(probe, samples);
}

std::vector<double> random_weights(std::mt19937_64& rng, std::size_t dim, double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  std::vector<double> w(dim);
  for (auto& v : w) {
    v = dist(rng);
  }
  return w;
}

}  // namespace

TEST_CASE("sigmoid basics") {
  CHECK(sigmoid(0.0) == 0.5);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-30.0, 30.0);
  for (int i = 0; i < 100; ++i) {
    const double z = dist(rng);
    CHECK(sigmoid(z) + sigmoid(-z) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sigmoid(z) > 0.0);
    CHECK(sigmoid(z) < 1.0);
  }

  const double saturated = sigmoid(500.0);
  CHECK(std::isfinite(saturated));
  CHECK(saturated > 1.0 - 1e-12);
  CHECK(saturated < 1.0);
  CHECK(sigmoid(-500.0) > 0.0);
  CHECK(sigmoid(-500.0) < 1e-12);
  // Far past exp underflow the clamp still keeps the value inside (0,1).
  CHECK(sigmoid(800.0) < 1.0);
  CHECK(sigmoid(-800.0) > 0.0);
}

TEST_CASE("nll at zero weights is N log 2") {
  const auto samples = std::vector<LabeledSample>{
      testutil::sample("a", {0, 1}, 1), testutil::sample("b", {2}, 0),
      testutil::sample("c", {}, 1)};
  const auto model = model_with_weights(3, {0.0, 0.0, 0.0});
  CHECK(nll(model, samples) == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-15));

  // Empty bics and no intercept: w.x = 0 whatever the weights.
  const auto lone = std::vector<LabeledSample>{testutil::sample("d", {}, 0)};
  const auto skewed = model_with_weights(3, {5.0, -2.0, 9.0});
  CHECK(nll(skewed, lone) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("nll matches the direct product-of-probabilities likelihood") {
  std::mt19937_64 rng(17);
  const FeatureSpace space{4};
  for (int round = 0; round < 40; ++round) {
    const auto samples = testutil::random_instance(rng, 1 + rng() % 8, space.m_count, 0.5);
    const auto model = model_with_weights(space.m_count, random_weights(rng, space.m_count, 1.5));

    double likelihood = 1.0;
    for (const auto& s : samples) {
      const auto dense = dense_vector(s, space);
      double z = 0.0;
      for (std::uint32_t m = 0; m < space.m_count; ++m) {
        z += model.weights[m] * dense[m];
      }
      const double p = 1.0 / (1.0 + std::exp(-z));
      likelihood *= (*s.label == Label::malicious) ? p : 1.0 - p;
    }
    CHECK(nll(model, samples) ==
          doctest::Approx(-std::log(likelihood)).epsilon(1e-9));
  }
}

TEST_CASE("gradient at zero weights puts -1/2 on triggered indices") {
  const auto samples = std::vector<LabeledSample>{testutil::sample("a", {1, 3}, 1)};
  const auto model = model_with_weights(5, std::vector<double>(5, 0.0));
  const auto g = gradient(model, samples);
  CHECK(g == std::vector<double>{0.0, -0.5, 0.0, -0.5, 0.0});
}

TEST_CASE("duplicating a sample doubles its gradient contribution") {
  std::mt19937_64 rng(23);
  const auto one = std::vector<LabeledSample>{testutil::sample("a", {0, 2, 5}, 1)};
  const auto two = std::vector<LabeledSample>{one[0], one[0]};
  const auto model = model_with_weights(6, random_weights(rng, 6, 1.0));
  const auto g1 = gradient(model, one);
  const auto g2 = gradient(model, two);
  for (std::size_t i = 0; i < g1.size(); ++i) {
    CHECK(g2[i] == 2.0 * g1[i]);
  }
}

TEST_CASE("gradient matches central finite differences of nll") {
  std::mt19937_64 rng(29);
  const double h = 1e-5;
  for (int round = 0; round < 25; ++round) {
    const std::uint32_t m_count = 2 + static_cast<std::uint32_t>(rng() % 15);
    const auto samples = testutil::random_instance(rng, 1 + rng() % 32, m_count, 0.4);
    const bool intercept = round % 2 == 0;
    const double lambda = round % 3 == 0 ? 0.0 : 1e-2;
    const std::size_t dim = m_count + (intercept ? 1 : 0);
    const auto model =
        model_with_weights(m_count, random_weights(rng, dim, 0.8), lambda, intercept);

    const auto g = gradient(model, samples);
    for (std::size_t i = 0; i < dim; ++i) {
      auto plus = model.weights;
      auto minus = model.weights;
      plus[i] += h;
      minus[i] -= h;
      const double fd = (nll_at(model, samples, plus) - nll_at(model, samples, minus)) / (2 * h);
      CHECK(std::abs(fd - g[i]) <= 1e-6 * std::max(1.0, std::abs(g[i])));
    }
  }
}

TEST_CASE("hessian structure") {
  const FeatureSpace space{4};
  SUBCASE("empty sample set with ridge gives lambda I") {
    const auto model = model_with_weights(4, std::vector<double>(4, 0.0), 0.5);
    const auto h = hessian(model, {});
    CHECK(h.isApprox(0.5 * Eigen::MatrixXd::Identity(4, 4)));
  }
  SUBCASE("single triggered index at zero weights contributes 1/4") {
    const auto samples = std::vector<LabeledSample>{testutil::sample("a", {2}, 1)};
    const auto model = model_with_weights(4, std::vector<double>(4, 0.0));
    const auto h = hessian(model, samples);
    CHECK(h(2, 2) == 0.25);
    CHECK(h.sum() == 0.25);
  }
}

TEST_CASE("hessian is symmetric and matches finite differences of the gradient") {
  std::mt19937_64 rng(31);
  const double h = 1e-5;
  for (int round = 0; round < 10; ++round) {
    const std::uint32_t m_count = 2 + static_cast<std::uint32_t>(rng() % 9);
    const auto samples = testutil::random_instance(rng, 1 + rng() % 24, m_count, 0.5);
    const double lambda = round % 2 == 0 ? 0.0 : 1e-3;
    const auto model =
        model_with_weights(m_count, random_weights(rng, m_count, 0.7), lambda);

    const auto hess = hessian(model, samples);
    const Eigen::MatrixXd transposed = hess.transpose();
    CHECK((hess.array() == transposed.array()).all());

    for (std::uint32_t j = 0; j < m_count; ++j) {
      LogRegModel plus = model;
      LogRegModel minus = model;
      plus.weights[j] += h;
      minus.weights[j] -= h;
      const auto g_plus = gradient(plus, samples);
      const auto g_minus = gradient(minus, samples);
      for (std::uint32_t i = 0; i < m_count; ++i) {
        const double fd = (g_plus[i] - g_minus[i]) / (2 * h);
        CHECK(std::abs(fd - hess(i, j)) <= 1e-5 * std::max(1.0, std::abs(hess(i, j))));
      }
    }
  }
}

TEST_CASE("fit recovers the closed-form single-feature MLE") {
  std::vector<LabeledSample> samples;
  for (int i = 0; i < 6; ++i) {
    samples.push_back(testutil::sample("p" + std::to_string(i), {0}, 1));
  }
  for (int i = 0; i < 4; ++i) {
    samples.push_back(testutil::sample("n" + std::to_string(i), {0}, 0));
  }
  SolverConfig config;
  config.ridge_lambda = 0.0;
  const auto fit = fit_logreg(samples, FeatureSpace{1}, config);
  CHECK(fit.report.converged);
  CHECK(fit.model.weights[0] == doctest::Approx(std::log(1.5)).epsilon(1e-8));
}

TEST_CASE("separable data diverges without ridge and converges with it") {
  const auto samples = std::vector<LabeledSample>{testutil::sample("a", {0}, 1),
                                                  testutil::sample("b", {1}, 0)};
  const FeatureSpace space{2};

  SolverConfig ridged;
  ridged.ridge_lambda = 1e-6;
  const auto with_ridge = fit_logreg(samples, space, ridged);
  CHECK(with_ridge.report.converged);
  for (const double w : with_ridge.model.weights) {
    CHECK(std::isfinite(w));
  }

  SolverConfig unridged;
  unridged.ridge_lambda = 0.0;
  const auto free_fit = fit_logreg(samples, space, unridged);
  CHECK_FALSE(free_fit.report.converged);
  CHECK(free_fit.report.iterations_used == unridged.max_iterations);

  // The weight norm grows monotonically across iterations: run one Newton
  // step at a time, warm starting from the previous iterate.
  SolverConfig stepper = unridged;
  stepper.max_iterations = 1;
  std::vector<double> weights;
  double previous_norm = 0.0;
  for (int iter = 0; iter < 6; ++iter) {
    const auto step = fit_logreg(samples, space, stepper, weights);
    weights = step.model.weights;
    const double norm = std::hypot(weights[0], weights[1]);
    CHECK(norm > previous_norm);
    previous_norm = norm;
  }
}

TEST_CASE("intercept settles at the base rate") {
  std::vector<LabeledSample> samples;
  for (int i = 0; i < 4; ++i) {
    samples.push_back(testutil::sample("s" + std::to_string(i), {}, i % 2));
  }
  SolverConfig config;
  config.ridge_lambda = 0.0;
  config.intercept = true;
  const auto fit = fit_logreg(samples, FeatureSpace{3}, config);
  CHECK(fit.report.converged);
  CHECK(std::abs(fit.model.weights[3]) <= 1e-12);
}

TEST_CASE("accepted nll trace is non-increasing") {
  std::mt19937_64 rng(37);
  for (int round = 0; round < 10; ++round) {
    const std::uint32_t m_count = 2 + static_cast<std::uint32_t>(rng() % 10);
    const auto samples = testutil::random_instance(rng, 8 + rng() % 24, m_count, 0.4);
    SolverConfig config;
    config.ridge_lambda = 1e-6;
    const auto fit = fit_logreg(samples, FeatureSpace{m_count}, config);
    REQUIRE(fit.report.nll_trace.size() >= 1);
    for (std::size_t i = 1; i < fit.report.nll_trace.size(); ++i) {
      CHECK(fit.report.nll_trace[i] <= fit.report.nll_trace[i - 1]);
    }
    CHECK(fit.report.final_nll == fit.report.nll_trace.back());
  }
}

TEST_CASE("predict_proba evaluates the sparse dot product") {
  const auto zero = model_with_weights(2, {0.0, 0.0});
  CHECK(predict_proba(zero, testutil::sample("a", {0, 1}, 1)) == 0.5);

  const auto skewed = model_with_weights(2, {3.0, -4.0});
  CHECK(predict_proba(skewed, testutil::sample("b", {}, 1)) == 0.5);

  const auto unit = model_with_weights(2, {1.0, -1.0});
  CHECK(predict_proba(unit, testutil::sample("c", {0}, 1)) ==
        doctest::Approx(0.7310585786300049).epsilon(1e-12));
}

TEST_CASE("classification boundary at 1/2 is inclusive") {
  const auto zero = model_with_weights(2, {0.0, 0.0});
  CHECK(classify(zero, testutil::sample("a", {0}, 1)) == Label::malicious);
  CHECK(classify(zero, testutil::sample("b", {}, 1)) == Label::malicious);

  const auto slightly_negative = model_with_weights(1, {-0.04});
  CHECK(predict_proba(slightly_negative, testutil::sample("c", {0}, 1)) < 0.5);
  CHECK(classify(slightly_negative, testutil::sample("c", {0}, 1)) == Label::benign);
}

TEST_CASE("untriggered features with zero weight leave predictions unchanged") {
  std::mt19937_64 rng(41);
  const auto samples = testutil::random_instance(rng, 16, 6, 0.4);
  const auto narrow = model_with_weights(6, random_weights(rng, 6, 1.0));
  auto wide_weights = narrow.weights;
  wide_weights.push_back(0.0);
  wide_weights.push_back(0.0);
  const auto wide = model_with_weights(8, wide_weights);
  for (const auto& s : samples) {
    CHECK(predict_proba(narrow, s) == predict_proba(wide, s));
    CHECK(classify(narrow, s) == classify(wide, s));
  }
}

TEST_CASE("training inputs must be labeled") {
  const auto samples = std::vector<LabeledSample>{testutil::unlabeled("u", {0})};
  const auto model = model_with_weights(1, {0.0});
  CHECK_THROWS_AS(nll(model, samples), std::invalid_argument);
  CHECK_THROWS_AS(gradient(model, samples), std::invalid_argument);
}
