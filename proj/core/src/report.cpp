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

#include "bictriage/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace bictriage {

namespace {

constexpr std::string_view kCsvHeader = "day,method,tp,tn,fp,fn,ppv,npv,sns,spc,acc";

std::string format_double(double value, int precision) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                    std::chars_format::fixed, precision);
  return std::string(buffer, result.ptr);
}

std::string metric_cell(const std::optional<double>& value) {
  return value.has_value() ? format_double(*value, 6) : std::string{};
}

std::string_view method_color(Method method) {
  switch (method) {
    case Method::lr: return "#1f77b4";
    case Method::nb: return "#2ca02c";
    case Method::mp1: return "#ff7f0e";
    case Method::mp2: return "#d62728";
  }
  return "#000000";
}

}  // namespace

std::string render_csv(const RunReport& report) {
  std::string out{kCsvHeader};
  out += '\n';
  for (const auto& day : report.days) {
    for (const auto method : report.methods) {
      const auto& counts = day.counts.at(method);
      const auto& metrics = day.metrics.at(method);
      out += day.day;
      out += ',';
      out += method_name(method);
      out += ',';
      out += std::to_string(counts.tp) + ',' + std::to_string(counts.tn) + ',' +
             std::to_string(counts.fp) + ',' + std::to_string(counts.fn) + ',';
      out += metric_cell(metrics.ppv) + ',' + metric_cell(metrics.npv) + ',' +
             metric_cell(metrics.sns) + ',' + metric_cell(metrics.spc) + ',' +
             metric_cell(metrics.acc);
      out += '\n';
    }
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::int64_t parse_count(const std::string& field) {
  std::int64_t value = 0;
  const auto result = std::from_chars(field.data(), field.data() + field.size(), value);
  if (result.ec != std::errc{} || result.ptr != field.data() + field.size() || value < 0) {
    throw std::invalid_argument("malformed count '" + field + "'");
  }
  return value;
}

}  // namespace

RunReport parse_csv(const std::string& text) {
  RunReport report;
  std::size_t start = 0;
  bool saw_header = false;
  DayResult* current = nullptr;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) {
      end = text.size();
    }
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) {
      continue;
    }
    if (!saw_header) {
      if (line != kCsvHeader) {
        throw std::invalid_argument("unexpected CSV header: '" + line + "'");
      }
      saw_header = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 11) {
      throw std::invalid_argument("expected 11 CSV fields, got " +
                                  std::to_string(fields.size()));
    }
    const auto method = parse_method(fields[1]);
    if (!method.has_value()) {
      throw std::invalid_argument("unknown method '" + fields[1] + "' in CSV");
    }
    if (current == nullptr || current->day != fields[0]) {
      report.days.emplace_back();
      current = &report.days.back();
      current->day = fields[0];
    }
    ConfusionCounts counts{parse_count(fields[2]), parse_count(fields[3]),
                           parse_count(fields[4]), parse_count(fields[5])};
    current->counts.emplace(*method, counts);
    current->metrics.emplace(*method, compute_metrics(counts));
    if (std::find(report.methods.begin(), report.methods.end(), *method) ==
        report.methods.end()) {
      report.methods.push_back(*method);
    }
  }
  if (!saw_header) {
    throw std::invalid_argument("empty CSV");
  }
  report.aggregates = aggregate(report.days, report.methods);
  return report;
}

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 540.0;

std::string svg_open() {
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"";
  out += format_double(kWidth, 0);
  out += "\" height=\"";
  out += format_double(kHeight, 0);
  out += "\" viewBox=\"0 0 960 540\" font-family=\"sans-serif\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"960\" height=\"540\" fill=\"white\"/>\n";
  return out;
}

std::string text_element(double x, double y, const std::string& content, int size,
                         const std::string& anchor) {
  return "<text x=\"" + format_double(x, 2) + "\" y=\"" + format_double(y, 2) +
         "\" font-size=\"" + std::to_string(size) + "\" text-anchor=\"" + anchor +
         "\" fill=\"#333\">" + content + "</text>\n";
}

}  // namespace

std::string render_accuracy_svg(const RunReport& report) {
  const double left = 70.0;
  const double right = kWidth - 150.0;
  const double top = 40.0;
  const double bottom = kHeight - 60.0;

  double min_acc = 1.0;
  bool any = false;
  for (const auto& day : report.days) {
    for (const auto method : report.methods) {
      const auto it = day.metrics.find(method);
      if (it != day.metrics.end() && it->second.acc.has_value()) {
        min_acc = std::min(min_acc, *it->second.acc);
        any = true;
      }
    }
  }
  const double y_lo =
      any ? std::clamp(std::floor((min_acc - 0.01) * 20.0) / 20.0, 0.0, 0.95) : 0.0;

  const auto x_of = [&](std::size_t i) {
    if (report.days.size() <= 1) {
      return (left + right) / 2.0;
    }
    return left + (right - left) * static_cast<double>(i) /
                      static_cast<double>(report.days.size() - 1);
  };
  const auto y_of = [&](double acc) {
    return bottom - (bottom - top) * (acc - y_lo) / (1.0 - y_lo);
  };

  std::string out = svg_open();
  out += text_element((left + right) / 2.0, 24.0, "Daily accuracy", 16, "middle");

  // Horizontal grid every 0.05.
  for (double level = y_lo; level <= 1.0 + 1e-9; level += 0.05) {
    const double y = y_of(level);
    out += "<line x1=\"" + format_double(left, 2) + "\" y1=\"" + format_double(y, 2) +
           "\" x2=\"" + format_double(right, 2) + "\" y2=\"" + format_double(y, 2) +
           "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
    out += text_element(left - 8.0, y + 4.0, format_double(level, 2), 11, "end");
  }

  // X tick labels, thinned to at most ~8.
  const std::size_t tick_step =
      std::max<std::size_t>(1, report.days.empty() ? 1 : (report.days.size() + 7) / 8);
  for (std::size_t i = 0; i < report.days.size(); i += tick_step) {
    out += text_element(x_of(i), bottom + 18.0, report.days[i].day, 10, "middle");
  }

  out += "<line x1=\"" + format_double(left, 2) + "\" y1=\"" + format_double(bottom, 2) +
         "\" x2=\"" + format_double(right, 2) + "\" y2=\"" + format_double(bottom, 2) +
         "\" stroke=\"#333\" stroke-width=\"1\"/>\n";

  for (const auto method : report.methods) {
    std::string points;
    for (std::size_t i = 0; i < report.days.size(); ++i) {
      const auto it = report.days[i].metrics.find(method);
      if (it == report.days[i].metrics.end() || !it->second.acc.has_value()) {
        continue;   // undefined days leave a gap in the series
      }
      points += format_double(x_of(i), 2) + "," + format_double(y_of(*it->second.acc), 2) + " ";
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(method_color(method)) +
           "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
  }

  // Legend.
  double legend_y = top + 10.0;
  for (const auto method : report.methods) {
    out += "<line x1=\"" + format_double(right + 16.0, 2) + "\" y1=\"" +
           format_double(legend_y, 2) + "\" x2=\"" + format_double(right + 44.0, 2) +
           "\" y2=\"" + format_double(legend_y, 2) + "\" stroke=\"" +
           std::string(method_color(method)) + "\" stroke-width=\"3\"/>\n";
    out += text_element(right + 50.0, legend_y + 4.0, std::string(method_name(method)), 12,
                        "start");
    legend_y += 22.0;
  }

  out += "</svg>\n";
  return out;
}

std::string render_averages_svg(const RunReport& report) {
  const double left = 70.0;
  const double right = kWidth - 150.0;
  const double top = 40.0;
  const double bottom = kHeight - 60.0;

  struct MetricColumn {
    std::string_view name;
    std::optional<double> MetricsReport::* field;
  };
  const MetricColumn columns[] = {
      {"PPV", &MetricsReport::ppv}, {"NPV", &MetricsReport::npv}, {"SNS", &MetricsReport::sns},
      {"SPC", &MetricsReport::spc}, {"ACC", &MetricsReport::acc},
  };

  const auto y_of = [&](double value) { return bottom - (bottom - top) * value; };

  std::string out = svg_open();
  out += text_element((left + right) / 2.0, 24.0, "Macro-averaged metrics", 16, "middle");

  for (double level = 0.0; level <= 1.0 + 1e-9; level += 0.1) {
    const double y = y_of(level);
    out += "<line x1=\"" + format_double(left, 2) + "\" y1=\"" + format_double(y, 2) +
           "\" x2=\"" + format_double(right, 2) + "\" y2=\"" + format_double(y, 2) +
           "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
    out += text_element(left - 8.0, y + 4.0, format_double(level, 1), 11, "end");
  }

  const double group_width = (right - left) / 5.0;
  const double bar_width =
      group_width / (static_cast<double>(report.methods.size()) + 1.0);
  for (std::size_t c = 0; c < 5; ++c) {
    const double group_x = left + group_width * static_cast<double>(c);
    out += text_element(group_x + group_width / 2.0, bottom + 18.0, std::string(columns[c].name),
                        12, "middle");
    for (std::size_t mi = 0; mi < report.methods.size(); ++mi) {
      const auto method = report.methods[mi];
      const auto agg_it = report.aggregates.find(method);
      if (agg_it == report.aggregates.end()) {
        continue;
      }
      const auto& value = agg_it->second.macro.*(columns[c].field);
      if (!value.has_value()) {
        continue;   // undefined macro averages draw no bar
      }
      const double x = group_x + bar_width * (static_cast<double>(mi) + 0.5);
      const double y = y_of(*value);
      out += "<rect x=\"" + format_double(x, 2) + "\" y=\"" + format_double(y, 2) +
             "\" width=\"" + format_double(bar_width * 0.9, 2) + "\" height=\"" +
             format_double(bottom - y, 2) + "\" fill=\"" +
             std::string(method_color(method)) + "\"/>\n";
      out += text_element(x + bar_width * 0.45, y - 4.0, format_double(*value, 3), 9, "middle");
    }
  }

  out += "<line x1=\"" + format_double(left, 2) + "\" y1=\"" + format_double(bottom, 2) +
         "\" x2=\"" + format_double(right, 2) + "\" y2=\"" + format_double(bottom, 2) +
         "\" stroke=\"#333\" stroke-width=\"1\"/>\n";

  double legend_y = top + 10.0;
  for (const auto method : report.methods) {
    out += "<rect x=\"" + format_double(right + 16.0, 2) + "\" y=\"" +
           format_double(legend_y - 8.0, 2) + "\" width=\"14\" height=\"14\" fill=\"" +
           std::string(method_color(method)) + "\"/>\n";
    out += text_element(right + 36.0, legend_y + 4.0, std::string(method_name(method)), 12,
                        "start");
    legend_y += 22.0;
  }

  out += "</svg>\n";
  return out;
}

std::string render_run_json(const RunConfig& config, const RunReport& report) {
  nlohmann::ordered_json j;
  auto& cfg = j["config"];
  cfg["data_dir"] = config.data_dir.string();
  std::vector<std::string> methods;
  for (const auto method : config.methods) {
    methods.emplace_back(method_name(method));
  }
  cfg["methods"] = methods;
  cfg["mp_threshold"] =
      config.mp_threshold.has_value() ? config.mp_threshold->str() : std::string("search");
  cfg["mp_rescore"] =
      config.mp_rescore == RescoreMode::snapshot ? "snapshot" : "incremental";
  if (config.window_days.has_value()) {
    cfg["window_days"] = *config.window_days;
  } else {
    cfg["window_days"] = nullptr;
  }
  auto& lr = cfg["lr_solver"];
  lr["ridge_lambda"] = config.lr_solver.ridge_lambda;
  lr["max_iterations"] = config.lr_solver.max_iterations;
  lr["tolerance"] = config.lr_solver.tolerance;
  lr["damping"] = config.lr_solver.damping;
  lr["intercept"] = config.lr_solver.intercept;
  cfg["lr_cold_start"] = config.lr_cold_start;
  cfg["threads"] = config.threads;

  auto& env = j["environment"];
  env["tool"] = "bictriage";
  env["version"] = "1.0.0";
#if defined(__VERSION__)
  env["compiler"] = __VERSION__;
#else
  env["compiler"] = "unknown";
#endif
  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  env["generated_at"] = stamp;
  env["days_evaluated"] = report.days.size();
  return j.dump(2) + "\n";
}

namespace {

void write_text_file(const std::filesystem::path& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + file.string() + " for writing");
  }
  out << content;
  out.flush();
  if (!out) {
    throw std::runtime_error("write failure on " + file.string());
  }
}

}  // namespace

void write_report_files(const RunReport& report, const RunConfig& config,
                        const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_text_file(out_dir / "report.csv", render_csv(report));
  write_text_file(out_dir / "accuracy.svg", render_accuracy_svg(report));
  write_text_file(out_dir / "averages.svg", render_averages_svg(report));
  write_text_file(out_dir / "run.json", render_run_json(config, report));
}

}  // namespace bictriage
