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


#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace fedkd {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};
MeanStd mean_std(std::span<const double> values);

/// "93.03±0.32": mean and std given as percentages, two decimals.
std::string format_cell(double mean_pct, double std_pct);

struct MatrixCell {
  std::string config;
  std::string run_id;
  std::string algorithm;
  std::string sharing;
  double alpha = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> final_acc;  // fractions, one per seed that finished
  bool failed = false;
  std::string error;
  MeanStd stats;  // over final_acc, in percent
};

/// Runs every config under every seed (`<out>/<run_id>/seed_<s>`) and
/// summarizes final accuracy per config. A failing run marks its cell failed
/// and the matrix is still produced.
std::vector<MatrixCell> run_matrix(std::span<const std::filesystem::path> configs, std::span<const std::uint64_t> seeds,
                                   const std::filesystem::path& out_dir, std::ostream* log = nullptr);

/// Writes matrix.csv and matrix.txt (aligned columns).
void write_matrix(std::span<const MatrixCell> cells, const std::filesystem::path& out_dir);
std::string format_matrix_text(std::span<const MatrixCell> cells);

/// Expands '*' and '?' in the last path component; sorted. A pattern
/// without wildcards is returned as-is.
std::vector<std::filesystem::path> expand_glob(const std::string& pattern);

}  // namespace fedkd
