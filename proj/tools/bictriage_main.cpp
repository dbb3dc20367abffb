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

// bictriage: generate, train on, classify and evaluate daily feeds of
// sandbox samples described by sparse binary behavioral indicators.
//
// Machine-readable results go to stdout as single JSON lines; diagnostics
// go to stderr. Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bictriage/datagen.hpp"
#include "bictriage/harness.hpp"
#include "bictriage/model_store.hpp"
#include "bictriage/report.hpp"

namespace {

using namespace bictriage;

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::optional<Rational> parse_threshold(const std::string& text) {
  if (text == "search") {
    return std::nullopt;
  }
  return Rational::parse(text);
}

// Accepts a rational/decimal in (0,1) or the literal "search".
const CLI::Validator kThresholdValidator(
    [](std::string& value) -> std::string {
      if (value == "search") {
        return {};
      }
      try {
        const auto r = Rational::parse(value);
        if (r.num <= 0 || r.num >= r.den) {
          return "threshold must lie in (0,1)";
        }
      } catch (const std::exception& e) {
        return std::string("invalid threshold: ") + e.what();
      }
      return {};
    },
    "THRESHOLD");

RescoreMode parse_rescore(const std::string& text) {
  return text == "incremental" ? RescoreMode::incremental : RescoreMode::snapshot;
}

struct GenerateOptions {
  std::string out;
  std::uint32_t days = 30;
  std::uint32_t per_day = 5000;
  std::uint32_t m_count = 256;
  std::uint64_t seed = 1;
  double prior = 0.32;
  double rho = 0.0;
  std::string start_date = "2024-01-01";
  std::string spec_file;
};

int cmd_generate(const GenerateOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  GeneratorSpec spec;
  if (!options.spec_file.empty()) {
    spec = load_generator_spec(options.spec_file);
  } else {
    spec = default_profile(options.seed, options.m_count, options.prior, options.per_day,
                           options.days);
    spec.correlated_rho = options.rho;
  }
  write_dataset(spec, options.out, options.start_date);

  nlohmann::ordered_json summary;
  summary["command"] = "generate";
  summary["out"] = options.out;
  summary["days"] = spec.days;
  summary["samples_per_day"] = spec.samples_per_day;
  summary["m_count"] = spec.m_count;
  summary["seed"] = spec.seed;
  summary["seconds"] = seconds_since(start);
  std::cout << summary.dump() << '\n';
  return 0;
}

struct TrainOptions {
  std::string method;
  std::string data_dir;
  std::string out;
  std::string threshold = "0.99";
  std::string rescore = "snapshot";
  double ridge_lambda = 1e-6;
  int max_iterations = 50;
  double tolerance = 1e-8;
  bool no_damping = false;
  bool intercept = false;
};

std::vector<LabeledSample> load_labeled(const std::filesystem::path& dir,
                                        const FeatureSpace& space) {
  std::vector<LabeledSample> samples;
  for (const auto& file : list_daily_files(dir)) {
    auto batch = load_daily_file(file, space);
    for (auto& s : batch.samples) {
      if (s.label.has_value()) {
        samples.push_back(std::move(s));
      }
    }
  }
  return samples;
}

int cmd_train(const TrainOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const FeatureSpace space = read_meta(options.data_dir);
  const auto samples = load_labeled(options.data_dir, space);
  if (samples.empty()) {
    throw std::runtime_error("no labeled samples under " + options.data_dir);
  }

  nlohmann::ordered_json summary;
  summary["command"] = "train";
  summary["method"] = options.method;
  summary["train_size"] = samples.size();
  summary["m_count"] = space.m_count;

  StoredModel model{LogRegModel{}};
  if (options.method == "lr") {
    SolverConfig config;
    config.ridge_lambda = options.ridge_lambda;
    config.max_iterations = options.max_iterations;
    config.tolerance = options.tolerance;
    config.damping = !options.no_damping;
    config.intercept = options.intercept;
    auto fitted = fit_logreg(samples, space, config);
    summary["iterations"] = fitted.report.iterations_used;
    summary["converged"] = fitted.report.converged;
    summary["final_nll"] = fitted.report.final_nll;
    model = std::move(fitted.model);
  } else if (options.method == "nb") {
    NbCounters counters(space.m_count);
    for (const auto& s : samples) {
      counters.add(s);
    }
    summary["class_totals"] = {counters.class_total[0], counters.class_total[1]};
    model = std::move(counters);
  } else {
    MpConfig config;
    config.threshold = parse_threshold(options.threshold);
    config.corrected = options.method == "mp2";
    config.rescore = parse_rescore(options.rescore);
    auto fitted = fit_mp(samples, space, config);
    summary["threshold"] = fitted.threshold.str();
    summary["corrected"] = fitted.corrected;
    model = std::move(fitted);
  }

  save_model(model, options.out);
  summary["out"] = options.out;
  summary["seconds"] = seconds_since(start);
  std::cout << summary.dump() << '\n';
  return 0;
}

struct ClassifyOptions {
  std::string model_file;
  std::string input;
  std::string output;   // empty = stdout
};

int cmd_classify(const ClassifyOptions& options) {
  const StoredModel model = load_model(options.model_file);
  const FeatureSpace space{model_m_count(model)};

  std::ifstream in(options.input);
  if (!in) {
    throw std::runtime_error("cannot open " + options.input);
  }
  const DailyBatch batch = parse_daily_file(in, space, options.input);

  std::ofstream file_out;
  if (!options.output.empty()) {
    file_out.open(options.output);
    if (!file_out) {
      throw std::runtime_error("cannot open " + options.output + " for writing");
    }
  }
  std::ostream& out = options.output.empty() ? std::cout : file_out;

  // NB tables are derived once; the other models classify as stored.
  std::optional<NbModel> nb;
  if (const auto* counters = std::get_if<NbCounters>(&model)) {
    nb = finalize(*counters);
  }

  for (const auto& sample : batch.samples) {
    Label prediction{};
    double score_value = 0.0;
    if (const auto* lr = std::get_if<LogRegModel>(&model)) {
      score_value = predict_proba(*lr, sample);
      prediction = classify(*lr, sample);
    } else if (nb.has_value()) {
      score_value = score(*nb, sample, Label::malicious) - score(*nb, sample, Label::benign);
      prediction = classify(*nb, sample);
    } else {
      const auto& mp = std::get<MpModel>(model);
      score_value = max_triggered_score(mp, sample);
      prediction = classify(mp, sample);
    }
    nlohmann::ordered_json line;
    line["id"] = sample.id;
    line["prediction"] = label_value(prediction);
    line["score"] = score_value;   // serialized as null if not finite
    out << line.dump() << '\n';
  }
  out.flush();
  return 0;
}

struct EvaluateOptions {
  std::string data_dir;
  std::string out_dir;
  std::string methods = "lr,nb,mp1,mp2";
  std::string threshold = "0.99";
  std::string rescore = "snapshot";
  std::optional<int> window;
  bool lr_cold_start = false;
  double ridge_lambda = 1e-6;
  int max_iterations = 50;
  double tolerance = 1e-8;
  bool intercept = false;
  int threads = 0;
};

int cmd_evaluate(const EvaluateOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RunConfig config;
  config.data_dir = options.data_dir;
  config.methods = parse_method_list(options.methods);
  config.mp_threshold = parse_threshold(options.threshold);
  config.mp_rescore = parse_rescore(options.rescore);
  config.window_days = options.window;
  config.lr_solver.ridge_lambda = options.ridge_lambda;
  config.lr_solver.max_iterations = options.max_iterations;
  config.lr_solver.tolerance = options.tolerance;
  config.lr_solver.intercept = options.intercept;
  config.lr_cold_start = options.lr_cold_start;
  config.threads = options.threads;

  const RunReport report = rolling_evaluate(config);
  write_report_files(report, config, options.out_dir);

  nlohmann::ordered_json summary;
  summary["command"] = "evaluate";
  summary["days"] = report.days.size();
  nlohmann::ordered_json per_method;
  for (const auto method : report.methods) {
    const auto& agg = report.aggregates.at(method);
    nlohmann::ordered_json entry;
    if (agg.macro.acc.has_value()) {
      entry["macro_acc"] = *agg.macro.acc;
    }
    if (agg.pooled.acc.has_value()) {
      entry["pooled_acc"] = *agg.pooled.acc;
    }
    per_method[std::string(method_name(method))] = entry;
  }
  summary["methods"] = per_method;
  summary["out"] = options.out_dir;
  summary["seconds"] = seconds_since(start);
  std::cout << summary.dump() << '\n';
  return 0;
}

struct ReportOptions {
  std::string in_dir;
  std::string out_dir;   // empty = same as in_dir
};

int cmd_report(const ReportOptions& options) {
  const std::filesystem::path in_dir = options.in_dir;
  const std::filesystem::path out_dir =
      options.out_dir.empty() ? in_dir : std::filesystem::path(options.out_dir);
  std::ifstream in(in_dir / "report.csv", std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + (in_dir / "report.csv").string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const RunReport report = parse_csv(buffer.str());

  std::filesystem::create_directories(out_dir);
  {
    std::ofstream svg(out_dir / "accuracy.svg", std::ios::binary);
    svg << render_accuracy_svg(report);
  }
  {
    std::ofstream svg(out_dir / "averages.svg", std::ios::binary);
    svg << render_averages_svg(report);
  }

  nlohmann::ordered_json summary;
  summary["command"] = "report";
  summary["days"] = report.days.size();
  nlohmann::ordered_json per_method;
  for (const auto method : report.methods) {
    const auto& agg = report.aggregates.at(method);
    nlohmann::ordered_json entry;
    const auto put = [&entry](const char* name, const std::optional<double>& value) {
      if (value.has_value()) {
        entry[name] = *value;
      }
    };
    put("macro_ppv", agg.macro.ppv);
    put("macro_npv", agg.macro.npv);
    put("macro_sns", agg.macro.sns);
    put("macro_spc", agg.macro.spc);
    put("macro_acc", agg.macro.acc);
    put("pooled_acc", agg.pooled.acc);
    per_method[std::string(method_name(method))] = entry;
  }
  summary["methods"] = per_method;
  summary["out"] = out_dir.string();
  std::cout << summary.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Behavioral-indicator triage toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read defaults from an INI-style key=value file");

  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")
      ->envname("BIC_TRIAGE_THREADS");

  GenerateOptions generate_options;
  auto* generate = app.add_subcommand("generate", "Write a synthetic daily-file dataset");
  generate->add_option("--out", generate_options.out, "Output directory")->required();
  generate->add_option("--days", generate_options.days, "Number of daily files");
  generate->add_option("--per-day", generate_options.per_day, "Samples per day");
  auto* opt_m = generate->add_option("--m", generate_options.m_count, "Number of BIC features");
  auto* opt_prior =
      generate->add_option("--prior", generate_options.prior, "Malicious class prior")
          ->check(CLI::Range(0.0, 1.0));
  generate->add_option("--seed", generate_options.seed, "Generator seed");
  auto* opt_rho = generate->add_option("--rho", generate_options.rho,
                                       "Correlated-copy probability for odd BICs")
                      ->check(CLI::Range(0.0, 1.0));
  generate->add_option("--start-date", generate_options.start_date, "First day (YYYY-MM-DD)");
  generate->add_option("--spec", generate_options.spec_file,
                       "Full generator spec JSON (replaces the profile flags)")
      ->excludes(opt_m)
      ->excludes(opt_prior)
      ->excludes(opt_rho);

  TrainOptions train_options;
  auto* train = app.add_subcommand("train", "Fit one model on every labeled sample");
  train->add_option("--method", train_options.method, "lr | nb | mp1 | mp2")
      ->required()
      ->check(CLI::IsMember({"lr", "nb", "mp1", "mp2"}));
  train->add_option("--data", train_options.data_dir, "Daily-file directory")->required();
  train->add_option("--out", train_options.out, "Model file to write")->required();
  train->add_option("--threshold", train_options.threshold,
                    "MP threshold in (0,1), or 'search'")
      ->check(kThresholdValidator);
  train->add_option("--rescore", train_options.rescore, "MP2 corrective rescoring")
      ->check(CLI::IsMember({"snapshot", "incremental"}));
  train->add_option("--lambda", train_options.ridge_lambda, "LR ridge penalty")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--max-iter", train_options.max_iterations, "LR Newton iteration cap")
      ->check(CLI::PositiveNumber);
  train->add_option("--tol", train_options.tolerance, "LR step sup-norm tolerance")
      ->check(CLI::PositiveNumber);
  train->add_flag("--no-damping", train_options.no_damping, "Disable LR step halving");
  train->add_flag("--intercept", train_options.intercept, "Add an LR intercept feature");

  ClassifyOptions classify_options;
  auto* classify = app.add_subcommand("classify", "Score a sample file with a stored model");
  classify->add_option("--model", classify_options.model_file, "Model file")->required();
  classify->add_option("--in", classify_options.input, "Input daily file")->required();
  classify->add_option("--out", classify_options.output, "Output file (default stdout)");

  EvaluateOptions evaluate_options;
  auto* evaluate = app.add_subcommand("evaluate", "Run the rolling daily protocol");
  evaluate->add_option("--data", evaluate_options.data_dir, "Daily-file directory")->required();
  evaluate->add_option("--out", evaluate_options.out_dir, "Results directory")->required();
  evaluate->add_option("--methods", evaluate_options.methods, "Comma-separated method list");
  evaluate->add_option("--threshold", evaluate_options.threshold,
                       "MP threshold in (0,1), or 'search'")
      ->check(kThresholdValidator);
  evaluate->add_option("--rescore", evaluate_options.rescore, "MP2 corrective rescoring")
      ->check(CLI::IsMember({"snapshot", "incremental"}));
  evaluate->add_option("--window", evaluate_options.window, "Sliding training window in days")
      ->check(CLI::PositiveNumber);
  evaluate->add_flag("--lr-cold-start", evaluate_options.lr_cold_start,
                     "Refit LR from zero every day");
  evaluate->add_option("--lambda", evaluate_options.ridge_lambda, "LR ridge penalty")
      ->check(CLI::NonNegativeNumber);
  evaluate->add_option("--max-iter", evaluate_options.max_iterations, "LR Newton iteration cap")
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--tol", evaluate_options.tolerance, "LR step sup-norm tolerance")
      ->check(CLI::PositiveNumber);
  evaluate->add_flag("--intercept", evaluate_options.intercept, "Add an LR intercept feature");

  ReportOptions report_options;
  auto* report = app.add_subcommand("report", "Regenerate charts from report.csv");
  report->add_option("--in", report_options.in_dir, "Results directory with report.csv")
      ->required();
  report->add_option("--out", report_options.out_dir, "Chart output directory (default --in)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);   // --help and friends
    }
    app.exit(e);
    return 2;
  }

  try {
    if (generate->parsed()) {
      return cmd_generate(generate_options);
    }
    if (train->parsed()) {
      return cmd_train(train_options);
    }
    if (classify->parsed()) {
      return cmd_classify(classify_options);
    }
    if (evaluate->parsed()) {
      evaluate_options.threads = threads;
      return cmd_evaluate(evaluate_options);
    }
    if (report->parsed()) {
      return cmd_report(report_options);
    }
  } catch (const std::exception& e) {
    std::cerr << "bictriage: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
