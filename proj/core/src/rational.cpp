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

#include "bictriage/rational.hpp"

#include <cctype>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bictriage {

Rational Rational::of(std::int64_t num, std::int64_t den) {
  if (den <= 0 || num < 0) {
    throw std::invalid_argument("rational requires num >= 0 and den > 0");
  }
  const auto g = std::gcd(num, den);
  return Rational{num / g, den / g};
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (const char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::int64_t parse_digits(std::string_view s) {
  std::int64_t value = 0;
  for (const char c : s) {
    if (value > (std::numeric_limits<std::int64_t>::max() - 9) / 10) {
      throw std::invalid_argument("rational literal too large");
    }
    value = value * 10 + (c - '0');
  }
  return value;
}

}  // namespace

Rational Rational::parse(std::string_view text) {
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto num_part = text.substr(0, slash);
    const auto den_part = text.substr(slash + 1);
    if (!all_digits(num_part) || !all_digits(den_part)) {
      throw std::invalid_argument("malformed rational: '" + std::string(text) + "'");
    }
    return of(parse_digits(num_part), parse_digits(den_part));
  }

  const auto dot = text.find('.');
  const auto int_part = dot == std::string_view::npos ? text : text.substr(0, dot);
  const auto frac_part = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if ((int_part.empty() && frac_part.empty()) ||
      (!int_part.empty() && !all_digits(int_part)) ||
      (!frac_part.empty() && !all_digits(frac_part))) {
    throw std::invalid_argument("malformed rational: '" + std::string(text) + "'");
  }
  if (frac_part.size() > 18) {
    throw std::invalid_argument("too many fractional digits: '" + std::string(text) + "'");
  }

  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac_part.size(); ++i) den *= 10;
  const std::int64_t whole = int_part.empty() ? 0 : parse_digits(int_part);
  const std::int64_t frac = frac_part.empty() ? 0 : parse_digits(frac_part);
  if (whole > (std::numeric_limits<std::int64_t>::max() - frac) / den) {
    throw std::invalid_argument("rational literal too large");
  }
  return of(whole * den + frac, den);
}

std::string Rational::str() const {
  return std::to_string(num) + "/" + std::to_string(den);
}

int compare(const Rational& a, const Rational& b) {
  const auto lhs = static_cast<__int128>(a.num) * b.den;
  const auto rhs = static_cast<__int128>(b.num) * a.den;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

bool score_at_least(std::int64_t t, std::int64_t f, const Rational& threshold) {
  const std::int64_t triggers = t + f;
  if (triggers == 0) {
    return false;   // score 0, threshold is in (0,1)
  }
  return static_cast<__int128>(t) * threshold.den >=
         static_cast<__int128>(threshold.num) * triggers;
}

int compare_scores(std::int64_t t1, std::int64_t f1, std::int64_t t2, std::int64_t f2) {
  const std::int64_t total1 = t1 + f1;
  const std::int64_t total2 = t2 + f2;
  if (total1 == 0 || total2 == 0) {
    const std::int64_t s1 = total1 == 0 ? 0 : (t1 > 0 ? 1 : 0);
    const std::int64_t s2 = total2 == 0 ? 0 : (t2 > 0 ? 1 : 0);
    return s1 < s2 ? -1 : (s1 > s2 ? 1 : 0);
  }
  const auto lhs = static_cast<__int128>(t1) * total2;
  const auto rhs = static_cast<__int128>(t2) * total1;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

}  // namespace bictriage
