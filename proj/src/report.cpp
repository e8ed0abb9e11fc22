/* Copyright 2026 The Cola Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cola/error.hpp"
#include "cola/metrics.hpp"

using nlohmann::json;

namespace cola {

namespace {

json prf_json(const Prf& p) { return json{{"p", p.precision}, {"r", p.recall}, {"f1", p.f1}}; }

Prf prf_from(const json& j) {
  return Prf{j.at("p").get<double>(), j.at("r").get<double>(), j.at("f1").get<double>()};
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << body;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::string report_json(const EvalReport& r) {
  json j;
  j["task"] = r.task;
  if (r.accuracy) j["accuracy"] = *r.accuracy;
  j["classes"] = r.matrix.classes;
  j["matrix"] = r.matrix.counts;
  j["unmatched"] = r.matrix.unmatched;
  j["micro_accuracy"] = micro_accuracy(r.matrix);
  json per_class = json::object();
  for (std::size_t c = 0; c < r.matrix.size(); ++c) {
    auto row = prf_json(r.prf.per_class[c].prf);
    row["support"] = r.prf.per_class[c].support;
    per_class[r.matrix.classes[c]] = row;
  }
  j["per_class"] = per_class;
  j["macro"] = prf_json(r.prf.macro);
  j["weighted"] = prf_json(r.prf.weighted);
  j["items"] = {{"total", r.evaluated + r.errors.size()},
                {"evaluated", r.evaluated},
                {"errored", r.errors.size()}};
  j["errors"] = json::array();
  for (const auto& e : r.errors) j["errors"].push_back({{"item_id", e.item_id}, {"error", e.message}});
  return j.dump(2) + "\n";
}

EvalReport read_report_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  try {
    const json j = json::parse(in);
    EvalReport r;
    r.task = j.at("task").get<std::string>();
    if (j.contains("accuracy")) r.accuracy = j["accuracy"].get<double>();
    r.matrix = ConfusionMatrix(j.at("classes").get<std::vector<std::string>>());
    r.matrix.counts = j.at("matrix").get<std::vector<std::vector<std::uint64_t>>>();
    r.matrix.unmatched = j.at("unmatched").get<std::vector<std::uint64_t>>();
    r.prf.per_class.resize(r.matrix.size());
    for (std::size_t c = 0; c < r.matrix.size(); ++c) {
      const auto& row = j.at("per_class").at(r.matrix.classes[c]);
      r.prf.per_class[c].prf = prf_from(row);
      r.prf.per_class[c].support = row.at("support").get<std::uint64_t>();
    }
    r.prf.macro = prf_from(j.at("macro"));
    r.prf.weighted = prf_from(j.at("weighted"));
    r.evaluated = j.at("items").at("evaluated").get<std::size_t>();
    for (const auto& e : j.at("errors")) {
      r.errors.push_back({e.at("item_id").get<std::string>(), e.at("error").get<std::string>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::string report_text(const EvalReport& r) {
  std::size_t width = 10;
  for (const auto& c : r.matrix.classes) width = std::max(width, c.size() + 2);
  auto pad = [&](const std::string& s) { return s + std::string(width - std::min(width, s.size()), ' '); };

  std::ostringstream out;
  out << "task: " << r.task << "\n";
  out << "items: " << r.evaluated + r.errors.size() << " total, " << r.evaluated << " evaluated, "
      << r.errors.size() << " errored\n";
  if (r.accuracy) out << "accuracy: " << fixed(*r.accuracy) << "\n";
  out << "micro accuracy: " << fixed(micro_accuracy(r.matrix)) << "\n\n";

  out << pad("class") << "precision  recall     f1         support\n";
  for (std::size_t c = 0; c < r.matrix.size(); ++c) {
    const auto& row = r.prf.per_class[c];
    out << pad(r.matrix.classes[c]) << fixed(row.prf.precision) << "     " << fixed(row.prf.recall)
        << "     " << fixed(row.prf.f1) << "     " << row.support << "\n";
  }
  out << pad("macro") << fixed(r.prf.macro.precision) << "     " << fixed(r.prf.macro.recall)
      << "     " << fixed(r.prf.macro.f1) << "\n";
  out << pad("weighted") << fixed(r.prf.weighted.precision) << "     "
      << fixed(r.prf.weighted.recall) << "     " << fixed(r.prf.weighted.f1) << "\n\n";

  out << "confusion matrix (rows actual, columns predicted; last column unmatched)\n";
  for (std::size_t a = 0; a < r.matrix.size(); ++a) {
    out << pad(r.matrix.classes[a]);
    for (auto v : r.matrix.counts[a]) out << v << ' ';
    out << "| " << r.matrix.unmatched[a] << "\n";
  }
  for (const auto& e : r.errors) out << "error " << e.item_id << ": " << e.message << "\n";
  return out.str();
}

std::string confusion_svg(const ConfusionMatrix& cm) {
  constexpr int kCell = 44;
  constexpr int kLeft = 150;
  constexpr int kTop = 150;
  const int n = static_cast<int>(cm.size());
  const int w = kLeft + (n + 1) * kCell + 20;
  const int h = kTop + n * kCell + 20;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  out << "<text x=\"10\" y=\"20\" font-size=\"14\">Confusion matrix (rows: actual, columns: "
         "predicted)</text>\n";
  for (int c = 0; c <= n; ++c) {
    const std::string label = c < n ? cm.classes[static_cast<std::size_t>(c)] : "unmatched";
    const int x = kLeft + c * kCell + kCell / 2;
    out << "<text class=\"col-label\" x=\"" << x << "\" y=\"" << kTop - 6
        << "\" transform=\"rotate(-60 " << x << " " << kTop - 6 << ")\">" << xml_escape(label)
        << "</text>\n";
  }
  for (int a = 0; a < n; ++a) {
    const auto row = static_cast<std::size_t>(a);
    const auto total = cm.row_total(row);
    const int y = kTop + a * kCell;
    out << "<text class=\"row-label\" x=\"" << kLeft - 6 << "\" y=\"" << y + kCell / 2 + 4
        << "\" text-anchor=\"end\">" << xml_escape(cm.classes[row]) << "</text>\n";
    for (int c = 0; c <= n; ++c) {
      const auto v = c < n ? cm.counts[row][static_cast<std::size_t>(c)] : cm.unmatched[row];
      const double t = total ? static_cast<double>(v) / static_cast<double>(total) : 0.0;
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - 0.85 * t)));
      const int x = kLeft + c * kCell;
      out << "<rect class=\"cell\" x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell
          << "\" height=\"" << kCell << "\" fill=\"rgb(" << shade << "," << shade
          << ",255)\" stroke=\"#999\"/>\n";
      out << "<text x=\"" << x + kCell / 2 << "\" y=\"" << y + kCell / 2 + 4
          << "\" text-anchor=\"middle\" fill=\"" << (t > 0.6 ? "white" : "black") << "\">" << v
          << "</text>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

void write_report(const EvalReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  write_file(fs::path(dir) / "report.json", report_json(report));
  write_file(fs::path(dir) / "report.txt", report_text(report));
  write_file(fs::path(dir) / "confusion.svg", confusion_svg(report.matrix));
}

}  // namespace cola
