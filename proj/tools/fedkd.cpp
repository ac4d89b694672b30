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


// fedkd command-line driver.
//
//   fedkd run --config <file> [--seed N] [--out DIR]
//   fedkd matrix --configs <glob> --seeds a,b,c [--out DIR]
//   fedkd plot --in <glob> [--in <glob> ...] --out DIR
//   fedkd prototype [--seed N]
//   fedkd selftest
//
// Exit codes: 0 success, 1 config error, 2 runtime failure, 3 selftest failure.

#include <chrono>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "fedkd/error.hpp"
#include "fedkd/harness/experiment.hpp"
#include "fedkd/harness/matrix.hpp"
#include "fedkd/harness/plot.hpp"
#include "fedkd/harness/prototype_study.hpp"
#include "fedkd/harness/selftest.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitSelftest = 3;

std::vector<std::uint64_t> parse_seeds(const std::string& list) {
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const auto comma = list.find(',', pos);
    const auto item = list.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw fedkd::ConfigError("--seeds: '" + item + "' is not a non-negative integer");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return seeds;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, std::string out) {
  auto config = fedkd::load_config(config_path);
  if (seed) config.round.seed = *seed;
  if (out.empty()) out = "results/" + config.run_id + "/seed_" + std::to_string(config.round.seed);
  const auto result = fedkd::run_experiment(config, out, &std::cerr);
  std::printf("%s: final test accuracy %.4f after %zu rounds (%.1f s), results in %s\n", config.run_id.c_str(),
              result.final_test_acc, config.round.rounds, result.wall_seconds, result.dir.string().c_str());
  return kExitOk;
}

int cmd_matrix(const std::string& pattern, const std::string& seed_list, const std::string& out) {
  const auto configs = fedkd::expand_glob(pattern);
  if (configs.empty()) throw fedkd::ConfigError("matrix: no config matches " + pattern);
  const auto seeds = parse_seeds(seed_list);
  const auto cells = fedkd::run_matrix(configs, seeds, out, &std::cerr);
  fedkd::write_matrix(cells, out);
  std::cout << fedkd::format_matrix_text(cells);
  for (const auto& c : cells) {
    if (c.failed) return kExitRuntime;
  }
  return kExitOk;
}

int cmd_plot(const std::vector<std::string>& patterns, const std::string& out) {
  std::vector<std::filesystem::path> csvs;
  for (const auto& p : patterns) {
    for (auto& path : fedkd::expand_glob(p)) csvs.push_back(std::move(path));
  }
  if (csvs.empty()) throw fedkd::ConfigError("plot: no input files");
  for (const auto& path : fedkd::emit_plots(csvs, out, &std::cerr)) std::cout << path.string() << '\n';
  return kExitOk;
}

int cmd_prototype(std::uint64_t seed) {
  const auto r = fedkd::run_prototype_study(seed);
  std::printf("user   before   after\n");
  for (std::size_t k = 0; k < 3; ++k) std::printf("%zu      %6.2f  %6.2f\n", k + 1, 100 * r.before[k], 100 * r.after[k]);
  std::printf("averaged model %.2f, oracle %.2f (%.1f s)\n", 100 * r.averaged, 100 * r.oracle, r.seconds);
  return kExitOk;
}

int cmd_selftest() {
  const auto start = std::chrono::steady_clock::now();
  const auto checks = fedkd::run_selftest(std::cout);
  std::size_t failed = 0;
  for (const auto& c : checks) failed += !c.passed;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%zu/%zu checks passed in %.2f s\n", checks.size() - failed, checks.size(), secs);
  return failed ? kExitSelftest : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fedkd: federated learning with data-free knowledge distillation"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--seed", seed, "override the config seed");
  run->add_option("--out", out_dir, "output directory (default results/<run_id>/seed_<seed>)");

  std::string pattern, seed_list, matrix_out = "results/matrix";
  auto* matrix = app.add_subcommand("matrix", "run configs x seeds and summarize final accuracy");
  matrix->add_option("--configs", pattern, "config glob, e.g. 'configs/mnist_*.json'")->required();
  matrix->add_option("--seeds", seed_list, "comma-separated seeds")->required();
  matrix->add_option("--out", matrix_out, "output directory");

  std::vector<std::string> plot_inputs;
  std::string plot_out;
  auto* plot = app.add_subcommand("plot", "render rounds.csv files as SVG line charts");
  plot->add_option("--in", plot_inputs, "rounds.csv path or glob (repeatable)")->required();
  plot->add_option("--out", plot_out, "output directory")->required();

  std::uint64_t proto_seed = 1;
  auto* proto = app.add_subcommand("prototype", "three-user 2D prototype: accuracy before and after KD");
  proto->add_option("--seed", proto_seed, "seed");

  auto* selftest = app.add_subcommand("selftest", "gradient checks and invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, seed, out_dir);
    if (*matrix) return cmd_matrix(pattern, seed_list, matrix_out);
    if (*plot) return cmd_plot(plot_inputs, plot_out);
    if (*proto) return cmd_prototype(proto_seed);
    if (*selftest) return cmd_selftest();
  } catch (const fedkd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
