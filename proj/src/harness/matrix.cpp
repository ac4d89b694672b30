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


#include "fedkd/harness/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "fedkd/error.hpp"
#include "fedkd/harness/experiment.hpp"

namespace fedkd {
namespace {

namespace fs = std::filesystem;

bool wildcard_match(std::string_view pattern, std::string_view text) {
  std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

std::string cell_text(const MatrixCell& c) {
  if (c.failed) return "failed";
  return format_cell(c.stats.mean, c.stats.std);
}

}  // namespace

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

std::string format_cell(double mean_pct, double std_pct) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f±%.2f", mean_pct, std_pct);
  return buf;
}

std::vector<MatrixCell> run_matrix(std::span<const fs::path> configs, std::span<const std::uint64_t> seeds,
                                   const fs::path& out_dir, std::ostream* log) {
  if (configs.empty()) throw ConfigError("matrix: no configs");
  if (seeds.empty()) throw ConfigError("matrix: no seeds");
  std::vector<MatrixCell> cells;
  for (const auto& path : configs) {
    MatrixCell cell;
    cell.config = path.string();
    cell.seeds.assign(seeds.begin(), seeds.end());
    try {
      auto config = load_config(path);
      cell.run_id = config.run_id;
      cell.algorithm = std::string(algorithm_name(config.round.algorithm));
      cell.sharing = std::string(sharing_name(config.round.sharing));
      cell.alpha = config.alpha;
      for (auto seed : seeds) {
        config.round.seed = seed;
        auto result = run_experiment(config, out_dir / config.run_id / ("seed_" + std::to_string(seed)), log);
        cell.final_acc.push_back(result.final_test_acc);
      }
      std::vector<double> pct;
      for (double a : cell.final_acc) pct.push_back(100.0 * a);
      cell.stats = mean_std(pct);
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
      if (log) *log << "matrix: " << path.string() << " failed: " << e.what() << '\n';
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

std::string format_matrix_text(std::span<const MatrixCell> cells) {
  std::vector<std::vector<std::string>> rows{{"run_id", "algorithm", "sharing", "alpha", "seeds", "final_acc"}};
  for (const auto& c : cells) {
    char alpha[32];
    std::snprintf(alpha, sizeof alpha, "%g", c.alpha);
    rows.push_back({c.run_id.empty() ? c.config : c.run_id, c.algorithm, c.sharing, alpha,
                    std::to_string(c.seeds.size()), cell_text(c)});
  }
  // Column widths count code points so the +- sign does not skew alignment.
  auto width = [](const std::string& s) {
    std::size_t n = 0;
    for (unsigned char ch : s) n += (ch & 0xC0) != 0x80;
    return n;
  };
  std::vector<std::size_t> w(rows.front().size(), 0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) w[i] = std::max(w[i], width(r[i]));
  }
  std::string out;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      out += r[i];
      if (i + 1 < r.size()) out += std::string(w[i] - width(r[i]) + 2, ' ');
    }
    out += '\n';
  }
  return out;
}

void write_matrix(std::span<const MatrixCell> cells, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::ofstream csv(out_dir / "matrix.csv");
  csv << "config,run_id,algorithm,sharing,alpha,seeds,mean_acc,std_acc,cell,status\n";
  for (const auto& c : cells) {
    char nums[96];
    std::snprintf(nums, sizeof nums, "%g,%zu,%.4f,%.4f", c.alpha, c.seeds.size(), c.stats.mean, c.stats.std);
    csv << c.config << ',' << c.run_id << ',' << c.algorithm << ',' << c.sharing << ',' << nums << ',' << cell_text(c)
        << ',' << (c.failed ? "failed" : "ok") << '\n';
  }
  std::ofstream(out_dir / "matrix.txt") << format_matrix_text(cells);
}

std::vector<fs::path> expand_glob(const std::string& pattern) {
  if (pattern.find_first_of("*?") == std::string::npos) return {fs::path(pattern)};
  const fs::path p(pattern);
  const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  if (dir.string().find_first_of("*?") != std::string::npos) {
    throw ConfigError("glob: wildcards are only supported in the last path component: " + pattern);
  }
  const std::string name = p.filename().string();
  std::vector<fs::path> out;
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && wildcard_match(name, entry.path().filename().string())) out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fedkd
