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
#include <string>
#include <string_view>

namespace bictriage {

/// Non-negative rational with positive denominator, kept reduced.
///
/// Score/threshold comparisons are performed on exact rationals so that a
/// boundary case like t/(t+f) == 0.99 never hinges on floating-point
/// rounding.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational of(std::int64_t num, std::int64_t den);
  /// Accepts decimal text ("0.99", ".5", "1"), or "num/den".
  static Rational parse(std::string_view text);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;   // "num/den"

  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Exact three-way comparison via 128-bit cross multiplication.
int compare(const Rational& a, const Rational& b);
inline bool operator<(const Rational& a, const Rational& b) { return compare(a, b) < 0; }
inline bool operator<=(const Rational& a, const Rational& b) { return compare(a, b) <= 0; }

/// Exact t/(t+f) >= threshold. A never-triggered BIC (t+f == 0) scores 0,
/// below any threshold in (0,1).
bool score_at_least(std::int64_t t, std::int64_t f, const Rational& threshold);

/// Exact three-way comparison of t1/(t1+f1) against t2/(t2+f2);
/// zero-trigger scores compare as 0.
int compare_scores(std::int64_t t1, std::int64_t f1, std::int64_t t2, std::int64_t f2);

}  // namespace bictriage
