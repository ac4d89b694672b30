// Copyright 2026 The fedkd Authors.
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


#include "fedkd/harness/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "fedkd/error.hpp"
#include "fedkd/harness/experiment.hpp"

namespace fedkd {
namespace {

namespace fs = std::filesystem;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr double kWidth = 720, kHeight = 440, kLeft = 70, kRight = 170, kTop = 40, kBottom = 50;

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Line {
  std::string label;
  const std::vector<double>* x;
  const std::vector<double>* y;
};

std::string render(const std::string& title, const std::string& y_label, const std::vector<Line>& lines) {
  double x0 = std::numeric_limits<double>::max(), x1 = std::numeric_limits<double>::lowest();
  double y0 = x0, y1 = x1;
  for (const auto& l : lines) {
    for (double v : *l.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : *l.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double v) { return kLeft + (v - x0) / (x1 - x0) * pw; };
  auto sy = [&](double v) { return kTop + (1.0 - (v - y0) / (y1 - y0)) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
         "</text>\n";
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0, yv = y0 + (y1 - y0) * i / 5.0;
    svg += "<line x1=\"" + num(sx(xv)) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(sx(xv)) + "\" y2=\"" +
           num(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(sx(xv)) + "\" y=\"" + num(kTop + ph + 18) + "\" text-anchor=\"middle\">" +
           tick_label(xv) + "</text>\n";
    svg += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(sy(yv)) + "\" x2=\"" + num(kLeft + pw) + "\" y2=\"" +
           num(sy(yv)) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(sy(yv) + 4) + "\" text-anchor=\"end\">" + tick_label(yv) +
           "</text>\n";
  }
  svg += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 10) + "\" text-anchor=\"middle\">round</text>\n";
  svg += "<text transform=\"translate(16," + num(kTop + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         escape(y_label) + "</text>\n";

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    std::string pts;
    for (std::size_t j = 0; j < lines[i].x->size(); ++j) {
      if (j) pts += ' ';
      pts += num(sx((*lines[i].x)[j])) + "," + num(sy((*lines[i].y)[j]));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts +
           "\"/>\n";
    const double ly = kTop + 10 + 18 * static_cast<double>(i);
    svg += "<line x1=\"" + num(kWidth - kRight + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(kWidth - kRight + 32) +
           "\" y2=\"" + num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(kWidth - kRight + 38) + "\" y=\"" + num(ly + 4) + "\">" + escape(lines[i].label) +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace

Series read_rounds_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(ParseError::Kind::kIo, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kRoundsCsvHeader) {
    throw ParseError(ParseError::Kind::kBadHeader, path.string() + ": not a rounds.csv file");
  }
  Series s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 10) throw ParseError(ParseError::Kind::kTruncated, path.string() + ": malformed row '" + line + "'");
    if (s.label.empty()) s.label = f[1];
    const double r = std::stod(f[0]);
    s.round.push_back(r);
    s.test_acc.push_back(std::stod(f[4]));
    s.train_loss.push_back(std::stod(f[5]));
    if (!f[6].empty()) {
      s.gen_round.push_back(r);
      s.gen_loss.push_back(std::stod(f[6]));
    }
  }
  return s;
}

std::vector<fs::path> emit_plots(std::span<const fs::path> csvs, const fs::path& out_dir, std::ostream* warn) {
  std::vector<Series> series;
  std::map<std::string, int> seen;
  for (const auto& path : csvs) {
    Series s = read_rounds_csv(path);
    if (s.round.empty()) {
      if (warn) *warn << "warning: " << path.string() << " has no rows, skipped\n";
      continue;
    }
    if (int n = seen[s.label]++; n > 0) s.label += " #" + std::to_string(n + 1);
    series.push_back(std::move(s));
  }
  std::vector<fs::path> written;
  if (series.empty()) return written;
  fs::create_directories(out_dir);

  auto emit = [&](const std::string& file, const std::string& title, const std::string& y_label,
                  std::vector<Line> lines) {
    if (lines.empty()) return;
    const auto path = out_dir / file;
    std::ofstream(path) << render(title, y_label, lines);
    written.push_back(path);
  };
  std::vector<Line> acc, loss, gen;
  for (const auto& s : series) {
    acc.push_back({s.label, &s.round, &s.test_acc});
    loss.push_back({s.label, &s.round, &s.train_loss});
    if (!s.gen_loss.empty()) gen.push_back({s.label, &s.gen_round, &s.gen_loss});
  }
  emit("accuracy.svg", "Test accuracy", "test accuracy", acc);
  emit("train_loss.svg", "Mean client training loss", "train loss", loss);
  emit("gen_loss.svg", "Generator loss", "generator loss", gen);
  return written;
}

}  // namespace fedkd
