// Copyright 2026 The facefeat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Result records on disk (records.jsonl, append-only) and the derived
// report: results.csv, plots.svg and summary.txt.

#ifndef FACEFEAT_REPORT_HPP
#define FACEFEAT_REPORT_HPP

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "facefeat/error.hpp"
#include "facefeat/harness.hpp"

namespace facefeat {

inline constexpr const char* kRecordsFile = "records.jsonl";

inline void append_record(const ResultRecord& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  std::ofstream f(dir / kRecordsFile, std::ios::app);
  if (!f) throw IoError("cannot append to '" + (dir / kRecordsFile).string() + "'");
  f << r.to_json().dump() << '\n';
}

inline std::vector<ResultRecord> read_records(const std::filesystem::path& file) {
  std::ifstream f(file);
  if (!f) throw IoError("cannot open records '" + file.string() + "'");
  std::vector<ResultRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(ResultRecord::from_json(j));
  }
  return out;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Series keyed by every parameter except the first; x is the first.
struct Series {
  std::string name;
  std::vector<const ResultRecord*> points;  // in x order of first appearance
};

inline std::vector<Series> group_series(const std::vector<ResultRecord>& records,
                                        std::vector<std::string>& x_values) {
  std::vector<Series> series;
  for (const auto& r : records) {
    if (!r.error.empty()) continue;
    const std::string x = r.params.empty() ? "" : r.params.front().second;
    if (std::find(x_values.begin(), x_values.end(), x) == x_values.end()) x_values.push_back(x);
    std::string name;
    for (std::size_t i = 1; i < r.params.size(); ++i)
      name += (name.empty() ? "" : ", ") + r.params[i].first + "=" + r.params[i].second;
    if (name.empty()) name = "all";
    auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) { return s.name == name; });
    if (it == series.end()) {
      series.push_back({name, {}});
      it = series.end() - 1;
    }
    it->points.push_back(&r);
  }
  return series;
}

inline std::string x_of(const ResultRecord& r) { return r.params.empty() ? "" : r.params.front().second; }

}  // namespace detail

inline std::string results_csv(const std::vector<ResultRecord>& records) {
  std::ostringstream out;
  out << "fingerprint,params,seeds,mean,std,wall_seconds,error\n";
  for (const auto& r : records) {
    out << r.fingerprint << ',' << detail::csv_field(r.params_text()) << ',' << r.accuracies.size() << ','
        << detail::fixed(r.mean, 4) << ',' << detail::fixed(r.stddev, 4) << ',' << detail::fixed(r.wall_seconds, 3)
        << ',' << detail::csv_field(r.error) << '\n';
  }
  return out.str();
}

/// Mean accuracy with one-std error bars against the first swept parameter.
inline std::string plots_svg(const std::vector<ResultRecord>& records) {
  std::vector<std::string> xs;
  const auto series = detail::group_series(records, xs);
  const double w = 720, h = 420, left = 60, right = 220, top = 30, bottom = 60;
  const double pw = w - left - right, ph = h - top - bottom;
  auto px = [&](std::size_t i) {
    return left + (xs.size() <= 1 ? pw / 2 : pw * static_cast<double>(i) / static_cast<double>(xs.size() - 1));
  };
  auto py = [&](double acc) { return top + ph * (1.0 - std::clamp(acc, 0.0, 100.0) / 100.0); };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"};

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 100; t += 20) {
    s << "<line x1=\"" << left - 4 << "\" y1=\"" << py(t) << "\" x2=\"" << left << "\" y2=\"" << py(t) << "\" stroke=\"black\"/>";
    s << "<text x=\"" << left - 8 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">" << t << "</text>\n";
  }
  for (std::size_t i = 0; i < xs.size(); ++i)
    s << "<text x=\"" << px(i) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">" << detail::xml_escape(xs[i]) << "</text>\n";
  const std::string x_label = records.empty() || records.front().params.empty() ? "" : records.front().params.front().first;
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 15 << "\" text-anchor=\"middle\">" << detail::xml_escape(x_label) << "</text>\n";
  s << "<text x=\"15\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 15 " << top + ph / 2 << ")\" text-anchor=\"middle\">accuracy (%)</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = palette[k % std::size(palette)];
    std::string pts;
    for (const auto* r : series[k].points) {
      const auto i = static_cast<std::size_t>(std::find(xs.begin(), xs.end(), detail::x_of(*r)) - xs.begin());
      const double x = px(i);
      pts += detail::fixed(x) + "," + detail::fixed(py(r->mean)) + " ";
      s << "<line x1=\"" << x << "\" y1=\"" << py(r->mean - r->stddev) << "\" x2=\"" << x << "\" y2=\"" << py(r->mean + r->stddev)
        << "\" stroke=\"" << color << "\"/>";
      s << "<circle cx=\"" << x << "\" cy=\"" << py(r->mean) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"" << pts << "\"/>\n";
    const double ly = top + 14.0 * static_cast<double>(k);
    s << "<rect x=\"" << left + pw + 15 << "\" y=\"" << ly << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>";
    s << "<text x=\"" << left + pw + 30 << "\" y=\"" << ly + 9 << "\">" << detail::xml_escape(series[k].name) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

/// One line per series: its means along the first parameter and whether
/// they are non-decreasing or non-increasing.
inline std::string summary_text(const std::vector<ResultRecord>& records) {
  std::vector<std::string> xs;
  const auto series = detail::group_series(records, xs);
  std::ostringstream out;
  const std::string x_label = records.empty() || records.front().params.empty() ? "x" : records.front().params.front().first;
  for (const auto& s : series) {
    bool up = true, down = true;
    std::string path;
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      if (i > 0) {
        const double step = s.points[i]->mean - s.points[i - 1]->mean;
        up = up && step >= -1e-9;
        down = down && step <= 1e-9;
      }
      path += (i ? " -> " : "") + detail::x_of(*s.points[i]) + ":" + detail::fixed(s.points[i]->mean);
    }
    const char* trend = s.points.size() < 2 ? "single point" : up && down ? "flat" : up ? "non-decreasing"
                                                                          : down      ? "non-increasing"
                                                                                      : "mixed";
    out << s.name << " | " << x_label << " " << path << " | " << trend << '\n';
  }
  std::size_t failed = 0;
  for (const auto& r : records) failed += !r.error.empty();
  if (failed) out << failed << " configuration(s) failed\n";
  return out.str();
}

/// Writes results.csv, plots.svg and summary.txt; rewriting from the same
/// records produces identical files.
inline void emit_report(const std::vector<ResultRecord>& records, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::trunc);
    if (!f) throw IoError("cannot write '" + (dir / name).string() + "'");
    f << text;
  };
  write("results.csv", results_csv(records));
  write("plots.svg", plots_svg(records));
  write("summary.txt", summary_text(records));
}

}  // namespace facefeat

#endif  // FACEFEAT_REPORT_HPP
