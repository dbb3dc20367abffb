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

#include "bictriage/metrics.hpp"

namespace bictriage {

void ConfusionCounts::add(Label prediction, Label truth) {
  if (prediction == Label::malicious) {
    truth == Label::malicious ? ++tp : ++fp;
  } else {
    truth == Label::benign ? ++tn : ++fn;
  }
}

ConfusionCounts merge(const ConfusionCounts& a, const ConfusionCounts& b) {
  return {a.tp + b.tp, a.tn + b.tn, a.fp + b.fp, a.fn + b.fn};
}

namespace {

std::optional<double> ratio(std::int64_t numerator, std::int64_t denominator) {
  if (denominator == 0) {
    return std::nullopt;
  }
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

}  // namespace

MetricsReport compute_metrics(const ConfusionCounts& c) {
  MetricsReport report;
  report.ppv = ratio(c.tp, c.tp + c.fp);
  report.npv = ratio(c.tn, c.tn + c.fn);
  report.sns = ratio(c.tp, c.tp + c.fn);
  report.spc = ratio(c.tn, c.tn + c.fp);
  report.acc = ratio(c.tp + c.tn, c.total());
  return report;
}

}  // namespace bictriage
