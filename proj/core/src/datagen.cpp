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

#include "bictriage/datagen.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace bictriage {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void validate_spec(const GeneratorSpec& spec) {
  if (spec.m_count < 1) {
    throw std::invalid_argument("m_count must be >= 1");
  }
  if (!(spec.prior_malicious > 0.0 && spec.prior_malicious < 1.0)) {
    throw std::invalid_argument("prior_malicious must be in (0,1)");
  }
  if (spec.trigger_prob_malicious.size() != spec.m_count ||
      spec.trigger_prob_benign.size() != spec.m_count) {
    throw std::invalid_argument("trigger probability vectors must have length m_count");
  }
  for (std::uint32_t m = 0; m < spec.m_count; ++m) {
    const double a = spec.trigger_prob_malicious[m];
    const double b = spec.trigger_prob_benign[m];
    if (!(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0)) {
      throw std::invalid_argument("trigger probabilities must be in [0,1]");
    }
  }
  if (!(spec.correlated_rho >= 0.0 && spec.correlated_rho <= 1.0)) {
    throw std::invalid_argument("correlated_rho must be in [0,1]");
  }
  if (spec.samples_per_day < 1 || spec.days < 1) {
    throw std::invalid_argument("samples_per_day and days must be >= 1");
  }
}

namespace {

// Top 53 bits as a uniform draw in [0,1).
double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string hex16(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(value));
  return std::string(buffer, 16);
}

}  // namespace

DailyBatch generate_day(const GeneratorSpec& spec, std::uint32_t day_index,
                        const std::string& day_name) {
  validate_spec(spec);
  std::mt19937_64 rng(splitmix64(spec.seed) ^
                      splitmix64(static_cast<std::uint64_t>(day_index) + 1));
  const std::uint64_t id_base = splitmix64(spec.seed ^ static_cast<std::uint64_t>(day_index));

  DailyBatch batch;
  batch.day = day_name;
  batch.samples.reserve(spec.samples_per_day);
  for (std::uint32_t ordinal = 0; ordinal < spec.samples_per_day; ++ordinal) {
    LabeledSample sample;
    sample.id = hex16(splitmix64(id_base ^ ordinal));
    const bool malicious = unit_draw(rng) < spec.prior_malicious;
    sample.label = malicious ? Label::malicious : Label::benign;
    const auto& probs = malicious ? spec.trigger_prob_malicious : spec.trigger_prob_benign;
    bool previous = false;
    for (std::uint32_t m = 0; m < spec.m_count; ++m) {
      bool triggered;
      if (spec.correlated_rho > 0.0 && (m % 2) == 1 && unit_draw(rng) < spec.correlated_rho) {
        triggered = previous;
      } else {
        triggered = unit_draw(rng) < probs[m];
      }
      if (triggered) {
        sample.bics.push_back(m);
      }
      previous = triggered;
    }
    batch.samples.push_back(std::move(sample));
  }
  return batch;
}

double marginal_trigger_prob(const GeneratorSpec& spec, std::uint32_t m, Label k) {
  const auto& probs =
      k == Label::malicious ? spec.trigger_prob_malicious : spec.trigger_prob_benign;
  double p = probs[m];
  if (spec.correlated_rho > 0.0 && (m % 2) == 1) {
    p = spec.correlated_rho * probs[m - 1] + (1.0 - spec.correlated_rho) * p;
  }
  return p;
}

double analytic_precision(const GeneratorSpec& spec, std::uint32_t m) {
  if (m >= spec.m_count) {
    throw std::out_of_range("BIC index out of range");
  }
  const double pi = spec.prior_malicious;
  const double a = marginal_trigger_prob(spec, m, Label::malicious);
  const double b = marginal_trigger_prob(spec, m, Label::benign);
  const double denom = pi * a + (1.0 - pi) * b;
  if (denom == 0.0) {
    throw std::invalid_argument("BIC " + std::to_string(m) + " never triggers");
  }
  return pi * a / denom;
}

namespace {

// Benign trigger probability that pins BIC precision to `target` given the
// malicious trigger probability and the class prior.
double benign_prob_for_precision(double prior, double malicious_prob, double target) {
  return prior * malicious_prob * (1.0 - target) / ((1.0 - prior) * target);
}

}  // namespace

GeneratorSpec default_profile(std::uint64_t seed, std::uint32_t m_count, double prior,
                              std::uint32_t samples_per_day, std::uint32_t days) {
  GeneratorSpec spec;
  spec.m_count = m_count;
  spec.prior_malicious = prior;
  spec.samples_per_day = samples_per_day;
  spec.days = days;
  spec.seed = seed;
  spec.trigger_prob_malicious.assign(m_count, 0.0);
  spec.trigger_prob_benign.assign(m_count, 0.0);

  // Planted straddle pair around the 0.99 default threshold.
  if (m_count >= 1) {
    spec.trigger_prob_malicious[0] = 0.25;
    spec.trigger_prob_benign[0] = benign_prob_for_precision(prior, 0.25, 0.995);
  }
  if (m_count >= 2) {
    spec.trigger_prob_malicious[1] = 0.25;
    spec.trigger_prob_benign[1] = benign_prob_for_precision(prior, 0.25, 0.985);
  }

  // Remaining BICs draw one of three roles from a seeded stream.
  std::mt19937_64 rng(splitmix64(seed ^ 0x7B1C5ED5A0E1B2C3ull));
  for (std::uint32_t m = 2; m < m_count; ++m) {
    const double role = unit_draw(rng);
    const double u1 = unit_draw(rng);
    const double u2 = unit_draw(rng);
    if (role < 0.3) {
      // Malicious-leaning: strong signal, faint benign noise.
      spec.trigger_prob_malicious[m] = 0.01 + 0.19 * u1;
      spec.trigger_prob_benign[m] = spec.trigger_prob_malicious[m] * 0.02 * u2;
    } else if (role < 0.6) {
      // Benign-leaning.
      spec.trigger_prob_benign[m] = 0.01 + 0.19 * u1;
      spec.trigger_prob_malicious[m] = spec.trigger_prob_benign[m] * 0.02 * u2;
    } else {
      // Uninformative noise.
      spec.trigger_prob_malicious[m] = 0.05 * u1;
      spec.trigger_prob_benign[m] = 0.05 * u2;
    }
  }
  return spec;
}

std::string date_string(const std::string& start_date, std::uint32_t day_offset) {
  int year = 0;
  int month = 0;
  int day = 0;
  if (std::sscanf(start_date.c_str(), "%4d-%2d-%2d", &year, &month, &day) != 3) {
    throw std::invalid_argument("malformed date: '" + start_date + "'");
  }
  const std::chrono::year_month_day start{std::chrono::year{year},
                                          std::chrono::month{static_cast<unsigned>(month)},
                                          std::chrono::day{static_cast<unsigned>(day)}};
  if (!start.ok()) {
    throw std::invalid_argument("invalid date: '" + start_date + "'");
  }
  const std::chrono::year_month_day shifted{std::chrono::sys_days{start} +
                                            std::chrono::days{day_offset}};
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "%04d-%02u-%02u", static_cast<int>(shifted.year()),
                static_cast<unsigned>(shifted.month()), static_cast<unsigned>(shifted.day()));
  return std::string(buffer);
}

void write_dataset(const GeneratorSpec& spec, const std::filesystem::path& dir,
                   const std::string& start_date) {
  validate_spec(spec);
  std::filesystem::create_directories(dir);
  write_meta(FeatureSpace{spec.m_count}, dir);
  save_generator_spec(spec, dir / "generator.json", start_date);
  for (std::uint32_t d = 0; d < spec.days; ++d) {
    const std::string day = date_string(start_date, d);
    const DailyBatch batch = generate_day(spec, d, day);
    save_daily_file(batch, dir / (day + ".jsonl"));
  }
}

GeneratorSpec load_generator_spec(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw ParseError("cannot open " + file.string());
  }
  const auto j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw ParseError("malformed generator spec in " + file.string());
  }
  try {
    GeneratorSpec spec;
    spec.m_count = j.at("m_count").get<std::uint32_t>();
    spec.prior_malicious = j.at("prior_malicious").get<double>();
    spec.trigger_prob_malicious = j.at("trigger_prob_malicious").get<std::vector<double>>();
    spec.trigger_prob_benign = j.at("trigger_prob_benign").get<std::vector<double>>();
    spec.samples_per_day = j.at("samples_per_day").get<std::uint32_t>();
    spec.days = j.at("days").get<std::uint32_t>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.correlated_rho = j.value("correlated_rho", 0.0);
    validate_spec(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed generator spec in " + file.string() + ": " + e.what());
  }
}

void save_generator_spec(const GeneratorSpec& spec, const std::filesystem::path& file,
                         const std::string& start_date) {
  nlohmann::ordered_json j;
  j["m_count"] = spec.m_count;
  j["prior_malicious"] = spec.prior_malicious;
  j["trigger_prob_malicious"] = spec.trigger_prob_malicious;
  j["trigger_prob_benign"] = spec.trigger_prob_benign;
  j["samples_per_day"] = spec.samples_per_day;
  j["days"] = spec.days;
  j["seed"] = spec.seed;
  j["correlated_rho"] = spec.correlated_rho;
  j["start_date"] = start_date;
  std::ofstream out(file);
  if (!out) {
    throw ParseError("cannot open " + file.string() + " for writing");
  }
  out << j.dump(2) << '\n';
}

}  // namespace bictriage
