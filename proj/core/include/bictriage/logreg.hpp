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

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bictriage/sample.hpp"

namespace bictriage {

struct SolverConfig {
  double ridge_lambda = 1e-6;  // L2 penalty weight; 0 disables regularization
  int max_iterations = 50;
  double tolerance = 1e-8;     // sup-norm of the accepted Newton step
  bool damping = true;         // step-halving line search; off = pure Newton steps
  bool intercept = false;      // extra always-on virtual feature
};

struct TrainReport {
  int iterations_used = 0;
  double final_nll = 0.0;
  bool converged = false;
  /// Objective at the start point followed by the value after every
  /// accepted step; non-increasing when damping is on.
  std::vector<double> nll_trace;
};

/// Binary logistic regression weights over the BIC space. When the
/// intercept is enabled the weight vector carries one extra trailing entry.
struct LogRegModel {
  std::uint32_t m_count = 0;
  bool intercept = false;
  std::vector<double> weights;
  SolverConfig config;

  std::size_t dimension() const {
    return static_cast<std::size_t>(m_count) + (intercept ? 1 : 0);
  }
};

/// Numerically stable logistic function, clamped strictly inside (0,1).
double sigmoid(double z);

/// Sparse dot product w.x (plus the intercept weight when enabled).
double dot(const LogRegModel& model, const LabeledSample& sample);

/// Negative log-likelihood of the labeled samples, plus (lambda/2)|W|^2.
/// Throws on unlabeled samples.
double nll(const LogRegModel& model, std::span<const LabeledSample> samples);

/// Gradient of nll; only triggered indices contribute per sample.
std::vector<double> gradient(const LogRegModel& model, std::span<const LabeledSample> samples);

/// Dense symmetric Hessian of nll; the ridge term sits on the diagonal.
Eigen::MatrixXd hessian(const LogRegModel& model, std::span<const LabeledSample> samples);

struct LogRegFit {
  LogRegModel model;
  TrainReport report;
};

/// Damped Newton-Raphson maximum likelihood. Starts from warm_start when
/// given (length must equal the model dimension), otherwise from zero.
/// A convergence stall reports converged = false; a failed linear solve
/// (after one automatic x10 ridge-boost retry) throws SolverError.
LogRegFit fit_logreg(std::span<const LabeledSample> samples, const FeatureSpace& space,
                     const SolverConfig& config, std::span<const double> warm_start = {});

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double predict_proba(const LogRegModel& model, const LabeledSample& sample);

/// MALICIOUS iff predicted probability >= 0.5 (boundary inclusive).
Label classify(const LogRegModel& model, const LabeledSample& sample);

}  // namespace bictriage
