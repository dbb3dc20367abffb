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

#include "bictriage/naive_bayes.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bictriage {

NbCounters::NbCounters(std::uint32_t m_count) : m_count(m_count) {
  n_km[0].assign(m_count, 0);
  n_km[1].assign(m_count, 0);
}

void NbCounters::add(const LabeledSample& sample) {
  if (!sample.label.has_value()) {
    throw std::invalid_argument("unlabeled sample '" + sample.id + "' in training set");
  }
  const int k = label_value(*sample.label);
  ++total;
  ++class_total[k];
  for (const auto m : sample.bics) {
    ++n_km[k][m];
  }
}

NbCounters merge(const NbCounters& a, const NbCounters& b) {
  if (a.m_count != b.m_count) {
    throw std::invalid_argument("counter shape mismatch");
  }
  NbCounters out(a.m_count);
  for (int k = 0; k < 2; ++k) {
    for (std::uint32_t m = 0; m < a.m_count; ++m) {
      out.n_km[k][m] = a.n_km[k][m] + b.n_km[k][m];
    }
    out.class_total[k] = a.class_total[k] + b.class_total[k];
  }
  out.total = a.total + b.total;
  return out;
}

NbModel finalize(const NbCounters& counters) {
  if (counters.total < 1) {
    throw std::invalid_argument("cannot finalize an empty training state");
  }
  NbModel model;
  model.m_count = counters.m_count;
  for (int k = 0; k < 2; ++k) {
    const std::int64_t n_k = counters.class_total[k];
    const double denom = static_cast<double>(n_k) + 2.0;
    model.log_p[k].resize(counters.m_count);
    model.log_q[k].resize(counters.m_count);
    double log_q_sum = 0.0;
    for (std::uint32_t m = 0; m < counters.m_count; ++m) {
      const std::int64_t n = counters.n_km[k][m];
      model.log_p[k][m] = std::log((static_cast<double>(n) + 1.0) / denom);
      // 1 - (n+1)/(N_k+2) == (N_k - n + 1)/(N_k+2), >= 1/(N_k+2) > 0.
      model.log_q[k][m] = std::log((static_cast<double>(n_k - n) + 1.0) / denom);
      log_q_sum += model.log_q[k][m];
    }
    model.log_prior[k] = n_k == 0 ? -std::numeric_limits<double>::infinity()
                                  : std::log(static_cast<double>(n_k) /
                                             static_cast<double>(counters.total));
    model.bias[k] = model.log_prior[k] + log_q_sum;
  }
  return model;
}

double score(const NbModel& model, const LabeledSample& sample, Label k) {
  const int c = label_value(k);
  double s = model.bias[c];
  for (const auto m : sample.bics) {
    s += model.log_p[c][m] - model.log_q[c][m];
  }
  return s;
}

Label classify(const NbModel& model, const LabeledSample& sample) {
  const double benign = score(model, sample, Label::benign);
  const double malicious = score(model, sample, Label::malicious);
  // Ties go to MALICIOUS: the conservative call for triage.
  return malicious >= benign ? Label::malicious : Label::benign;
}

}  // namespace bictriage
