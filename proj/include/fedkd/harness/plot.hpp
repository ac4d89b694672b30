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

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace fedkd {

/// One rounds.csv file reduced to the plotted columns.
struct Series {
  std::string label;
  std::vector<double> round;
  std::vector<double> test_acc;
  std::vector<double> train_loss;
  std::vector<double> gen_loss;  // rounds without a value are skipped
  std::vector<double> gen_round;
};

/// Throws ParseError when the header does not match the rounds.csv schema.
Series read_rounds_csv(const std::filesystem::path& path);

/// One SVG line chart per metric (accuracy.svg, train_loss.svg and, when any
/// series has generator losses, gen_loss.svg) with one line per input file.
/// Empty files are skipped with a warning. Returns the files written.
std::vector<std::filesystem::path> emit_plots(std::span<const std::filesystem::path> csvs,
                                              const std::filesystem::path& out_dir, std::ostream* warn = nullptr);

}  // namespace fedkd
