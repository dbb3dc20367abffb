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

#include "bictriage/logreg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bictriage {

double sigmoid(double z) {
  double s;
  if (z >= 0.0) {
    const double e = std::exp(-z);
    s = 1.0 / (1.0 + e);
  } else {
    const double e = std::exp(z);
    s = e / (1.0 + e);
  }
  // Clamp strictly inside (0,1); exp underflow would otherwise saturate.
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  return std::clamp(s, lo, hi);
}

double dot(const LogRegModel& model, const LabeledSample& sample) {
  double z = 0.0;
  for (const auto m : sample.bics) {
    z += model.weights[m];
  }
  if (model.intercept) {
    z += model.weights[model.m_count];
  }
  return z;
}

namespace {

// log(1 + e^z) without overflow for large |z|.
double log1p_exp(double z) {
  if (z > 0.0) {
    return z + std::log1p(std::exp(-z));
  }
  return std::log1p(std::exp(z));
}

Label require_label(const LabeledSample& sample) {
  if (!sample.label.has_value()) {
    throw std::invalid_argument("unlabeled sample '" + sample.id + "' in training set");
  }
  return *sample.label;
}

double sup_norm(const Eigen::VectorXd& v) { return v.lpNorm<Eigen::Infinity>(); }

}  // namespace

double nll(const LogRegModel& model, std::span<const LabeledSample> samples) {
  double loss = 0.0;
  for (const auto& sample : samples) {
    const double z = dot(model, sample);
    const double y = static_cast<double>(label_value(require_label(sample)));
    loss -= y * z - log1p_exp(z);
  }
  if (model.config.ridge_lambda > 0.0) {
    double norm2 = 0.0;
    for (const double w : model.weights) {
      norm2 += w * w;
    }
    loss += 0.5 * model.config.ridge_lambda * norm2;
  }
  return loss;
}

std::vector<double> gradient(const LogRegModel& model, std::span<const LabeledSample> samples) {
  std::vector<double> g(model.dimension(), 0.0);
  for (const auto& sample : samples) {
    const double s = sigmoid(dot(model, sample));
    const double residual = static_cast<double>(label_value(require_label(sample))) - s;
    for (const auto m : sample.bics) {
      g[m] -= residual;
    }
    if (model.intercept) {
      g[model.m_count] -= residual;
    }
  }
  if (model.config.ridge_lambda > 0.0) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += model.config.ridge_lambda * model.weights[i];
    }
  }
  return g;
}

Eigen::MatrixXd hessian(const LogRegModel& model, std::span<const LabeledSample> samples) {
  const auto dim = static_cast<Eigen::Index>(model.dimension());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  std::vector<std::uint32_t> active;
  for (const auto& sample : samples) {
    require_label(sample);
    const double s = sigmoid(dot(model, sample));
    const double weight = s * (1.0 - s);
    active.assign(sample.bics.begin(), sample.bics.end());
    if (model.intercept) {
      active.push_back(model.m_count);
    }
    for (const auto i : active) {
      for (const auto j : active) {
        h(i, j) += weight;
      }
    }
  }
  if (model.config.ridge_lambda > 0.0) {
    h.diagonal().array() += model.config.ridge_lambda;
  }
  return h;
}

namespace {

// LDLT solve with a finite-solution/residual sanity check.
bool try_solve(const Eigen::MatrixXd& h, const Eigen::VectorXd& g, Eigen::VectorXd& step) {
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
  if (ldlt.info() != Eigen::Success) {
    return false;
  }
  step = ldlt.solve(g);
  if (!step.allFinite()) {
    return false;
  }
  const double residual = sup_norm(h * step - g);
  return residual <= 1e-8 * std::max(1.0, sup_norm(g));
}

}  // namespace

LogRegFit fit_logreg(std::span<const LabeledSample> samples, const FeatureSpace& space,
                     const SolverConfig& config, std::span<const double> warm_start) {
  LogRegModel model;
  model.m_count = space.m_count;
  model.intercept = config.intercept;
  model.config = config;
  const std::size_t dim = model.dimension();
  if (!warm_start.empty() && warm_start.size() != dim) {
    throw std::invalid_argument("warm start length does not match model dimension");
  }
  model.weights.assign(dim, 0.0);
  if (!warm_start.empty()) {
    model.weights.assign(warm_start.begin(), warm_start.end());
  }

  TrainReport report;
  double current = nll(model, samples);
  report.nll_trace.push_back(current);

  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(model.weights.data(),
                                                        static_cast<Eigen::Index>(dim));
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    const auto grad = gradient(model, samples);
    const Eigen::Map<const Eigen::VectorXd> g(grad.data(), static_cast<Eigen::Index>(dim));
    Eigen::MatrixXd h = hessian(model, samples);

    Eigen::VectorXd step;
    if (!try_solve(h, g, step)) {
      const double boost = 10.0 * std::max(config.ridge_lambda, 1e-12);
      h.diagonal().array() += boost;
      if (!try_solve(h, g, step)) {
        throw SolverError("Newton linear solve failed even after ridge boost; "
                          "the training data is degenerate");
      }
    }

    double scale = 1.0;
    Eigen::VectorXd w_next = w - step;
    if (config.damping) {
      // Halve the step until the objective stops increasing.
      bool accepted = false;
      for (int halvings = 0; halvings < 60; ++halvings) {
        w_next = w - scale * step;
        std::copy(w_next.data(), w_next.data() + dim, model.weights.begin());
        const double candidate = nll(model, samples);
        if (candidate <= current) {
          current = candidate;
          accepted = true;
          break;
        }
        scale *= 0.5;
      }
      if (!accepted) {
        // Stalled: no decrease at the minimal step size.
        std::copy(w.data(), w.data() + dim, model.weights.begin());
        report.iterations_used = iter - 1;
        report.final_nll = current;
        report.converged = false;
        return {std::move(model), report};
      }
    } else {
      std::copy(w_next.data(), w_next.data() + dim, model.weights.begin());
      current = nll(model, samples);
    }

    w = Eigen::Map<const Eigen::VectorXd>(model.weights.data(), static_cast<Eigen::Index>(dim));
    report.nll_trace.push_back(current);
    report.iterations_used = iter;
    if (sup_norm(scale * step) < config.tolerance) {
      report.converged = true;
      break;
    }
  }

  report.final_nll = current;
  return {std::move(model), report};
}

double predict_proba(const LogRegModel& model, const LabeledSample& sample) {
  return sigmoid(dot(model, sample));
}

Label classify(const LogRegModel& model, const LabeledSample& sample) {
  return predict_proba(model, sample) >= 0.5 ? Label::malicious : Label::benign;
}

}  // namespace bictriage
