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

#include "bictriage/harness.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <thread>

namespace bictriage {

std::string_view method_name(Method method) {
  switch (method) {
    case Method::lr: return "lr";
    case Method::nb: return "nb";
    case Method::mp1: return "mp1";
    case Method::mp2: return "mp2";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "lr") return Method::lr;
  if (name == "nb") return Method::nb;
  if (name == "mp1") return Method::mp1;
  if (name == "mp2") return Method::mp2;
  return std::nullopt;
}

std::vector<Method> parse_method_list(std::string_view csv) {
  std::vector<Method> methods;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto comma = csv.find(',', start);
    const auto token = csv.substr(start, comma == std::string_view::npos ? csv.size() - start
                                                                         : comma - start);
    const auto method = parse_method(token);
    if (!method.has_value()) {
      throw std::invalid_argument("unknown method '" + std::string(token) + "'");
    }
    if (std::find(methods.begin(), methods.end(), *method) != methods.end()) {
      throw std::invalid_argument("duplicate method '" + std::string(token) + "'");
    }
    methods.push_back(*method);
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  if (methods.empty()) {
    throw std::invalid_argument("empty method list");
  }
  return methods;
}

namespace {

std::optional<double> mean(const std::vector<double>& values) {
  if (values.empty()) {
    return std::nullopt;
  }
  double sum = 0.0;
  for (const double v : values) {
    sum += v;
  }
  return sum / static_cast<double>(values.size());
}

}  // namespace

std::map<Method, MethodAggregate> aggregate(std::span<const DayResult> days,
                                            std::span<const Method> methods) {
  std::map<Method, MethodAggregate> out;
  for (const auto method : methods) {
    MethodAggregate agg;
    std::vector<double> ppv, npv, sns, spc, acc;
    for (const auto& day : days) {
      const auto counts_it = day.counts.find(method);
      if (counts_it == day.counts.end()) {
        continue;
      }
      agg.pooled_counts = merge(agg.pooled_counts, counts_it->second);
      const auto& metrics = day.metrics.at(method);
      if (metrics.ppv) ppv.push_back(*metrics.ppv);
      if (metrics.npv) npv.push_back(*metrics.npv);
      if (metrics.sns) sns.push_back(*metrics.sns);
      if (metrics.spc) spc.push_back(*metrics.spc);
      if (metrics.acc) acc.push_back(*metrics.acc);
    }
    agg.macro = MetricsReport{mean(ppv), mean(npv), mean(sns), mean(spc), mean(acc)};
    agg.pooled = compute_metrics(agg.pooled_counts);
    out.emplace(method, std::move(agg));
  }
  return out;
}

RollingEvaluator::RollingEvaluator(RunConfig config, FeatureSpace space,
                                   std::vector<DailyBatch> batches)
    : config_(std::move(config)),
      space_(space),
      batches_(std::move(batches)),
      nb_counters_(space.m_count),
      mp_counters_(space.m_count) {
  if (config_.methods.empty()) {
    throw std::invalid_argument("no methods selected");
  }
  if (config_.window_days.has_value() && *config_.window_days < 1) {
    throw std::invalid_argument("window_days must be >= 1");
  }
  if (batches_.size() < 2) {
    throw std::invalid_argument("the rolling protocol needs at least 2 daily files");
  }
  lr_weights_.assign(space_.m_count + (config_.lr_solver.intercept ? 1 : 0), 0.0);
  absorb_day(0);
}

bool RollingEvaluator::wants(Method m) const {
  return std::find(config_.methods.begin(), config_.methods.end(), m) != config_.methods.end();
}

void RollingEvaluator::absorb_day(std::size_t index) {
  for (const auto& sample : batches_[index].samples) {
    if (!sample.label.has_value()) {
      continue;   // unlabeled samples never enter training state
    }
    nb_counters_.add(sample);
    mp_counters_.add(sample);
  }
  window_.push_back(index);
}

void RollingEvaluator::trim_window() {
  if (!config_.window_days.has_value()) {
    return;
  }
  const auto window = static_cast<std::size_t>(*config_.window_days);
  while (window_.size() > window) {
    const auto& batch = batches_[window_.front()];
    for (const auto& sample : batch.samples) {
      if (!sample.label.has_value()) {
        continue;
      }
      const int y = label_value(*sample.label);
      --nb_counters_.total;
      --nb_counters_.class_total[y];
      for (const auto m : sample.bics) {
        --nb_counters_.n_km[y][m];
        mp_counters_.t[m] -= y;
        mp_counters_.f[m] -= 1 - y;
      }
    }
    window_.pop_front();
  }
}

std::vector<LabeledSample> RollingEvaluator::training_pool() const {
  std::vector<LabeledSample> pool;
  for (const auto index : window_) {
    for (const auto& sample : batches_[index].samples) {
      if (sample.label.has_value()) {
        pool.push_back(sample);
      }
    }
  }
  return pool;
}

namespace {

struct DayModels {
  std::optional<LogRegModel> lr;
  std::optional<NbModel> nb;
  std::optional<MpModel> mp1;
  std::optional<MpModel> mp2;
};

struct Shard {
  std::map<Method, ConfusionCounts> counts;
  std::int64_t empty_bics = 0;
};

Label predict(const DayModels& models, Method method, const LabeledSample& sample) {
  switch (method) {
    case Method::lr: return classify(*models.lr, sample);
    case Method::nb: return classify(*models.nb, sample);
    case Method::mp1: return classify(*models.mp1, sample);
    case Method::mp2: return classify(*models.mp2, sample);
  }
  throw std::logic_error("unreachable");
}

}  // namespace

DayResult RollingEvaluator::evaluate_next_day() {
  if (done()) {
    throw std::logic_error("no days left to evaluate");
  }
  const std::size_t today = next_day_;

  DayResult result;
  result.day = batches_[today].day;

  const auto train_start = std::chrono::steady_clock::now();
  const std::vector<LabeledSample> pool = training_pool();
  result.train_size = static_cast<std::int64_t>(pool.size());

  DayModels models;
  if (wants(Method::nb)) {
    models.nb = finalize(nb_counters_);
  }
  if (wants(Method::mp1) || wants(Method::mp2)) {
    const Rational threshold =
        config_.mp_threshold.has_value()
            ? *config_.mp_threshold
            : fit_threshold(mp_counters_, pool, default_threshold_grid());
    if (wants(Method::mp1)) {
      models.mp1 = make_mp_model(mp_counters_, threshold, false);
    }
    if (wants(Method::mp2)) {
      // The corrective pass replays the stored window in order; this is the
      // one O(history) step of the daily loop.
      MpCounters corrected =
          corrective_pass(mp_counters_, threshold, pool, config_.mp_rescore);
      models.mp2 = make_mp_model(std::move(corrected), threshold, true);
    }
  }
  if (wants(Method::lr)) {
    const std::span<const double> warm =
        config_.lr_cold_start ? std::span<const double>{} : std::span<const double>(lr_weights_);
    auto fitted = fit_logreg(pool, space_, config_.lr_solver, warm);
    lr_weights_ = fitted.model.weights;
    models.lr = std::move(fitted.model);
  }
  result.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - train_start).count();

  const auto classify_start = std::chrono::steady_clock::now();
  const auto& samples = batches_[today].samples;
  result.test_size = static_cast<std::int64_t>(samples.size());

  const int requested = config_.threads > 0
                            ? config_.threads
                            : static_cast<int>(std::thread::hardware_concurrency());
  const std::size_t worker_count =
      std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(requested, 1)),
                                                     samples.size() == 0 ? 1 : samples.size()));
  std::vector<Shard> shards(worker_count);

  // Contiguous sharding; integer counters merge in shard order, so the
  // result is identical for any worker count.
  const auto run_shard = [&](std::size_t shard_index) {
    const std::size_t begin = samples.size() * shard_index / worker_count;
    const std::size_t end = samples.size() * (shard_index + 1) / worker_count;
    Shard& shard = shards[shard_index];
    for (std::size_t i = begin; i < end; ++i) {
      const auto& sample = samples[i];
      for (const auto method : config_.methods) {
        const Label prediction = predict(models, method, sample);
        if (sample.label.has_value()) {
          shard.counts[method].add(prediction, *sample.label);
        }
      }
      if (sample.label.has_value() && sample.bics.empty()) {
        ++shard.empty_bics;
      }
    }
  };

  if (worker_count == 1) {
    run_shard(0);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(worker_count);
    for (std::size_t s = 0; s < worker_count; ++s) {
      workers.emplace_back(run_shard, s);
    }
    for (auto& worker : workers) {
      worker.join();
    }
  }

  for (const auto method : config_.methods) {
    ConfusionCounts counts;
    for (const auto& shard : shards) {
      const auto it = shard.counts.find(method);
      if (it != shard.counts.end()) {
        counts = merge(counts, it->second);
      }
    }
    result.counts.emplace(method, counts);
    result.metrics.emplace(method, compute_metrics(counts));
  }
  for (const auto& shard : shards) {
    result.empty_bics_count += shard.empty_bics;
  }
  result.classify_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - classify_start).count();

  absorb_day(today);
  trim_window();
  ++next_day_;
  return result;
}

RunReport rolling_evaluate(const RunConfig& config) {
  const FeatureSpace space = read_meta(config.data_dir);
  const auto files = list_daily_files(config.data_dir);
  if (files.size() < 2) {
    throw std::invalid_argument("the rolling protocol needs at least 2 daily files in " +
                                config.data_dir.string());
  }
  std::vector<DailyBatch> batches;
  batches.reserve(files.size());
  for (const auto& file : files) {
    batches.push_back(load_daily_file(file, space));
  }

  RollingEvaluator evaluator(config, space, std::move(batches));
  RunReport report;
  report.methods = config.methods;
  while (!evaluator.done()) {
    report.days.push_back(evaluator.evaluate_next_day());
  }
  report.aggregates = aggregate(report.days, report.methods);
  return report;
}

}  // namespace bictriage
