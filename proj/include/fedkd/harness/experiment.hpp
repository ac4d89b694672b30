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
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fedkd/harness/config.hpp"
#include "fedkd/protocols/round.hpp"

namespace fedkd {

inline constexpr const char* kRoundsCsvHeader =
    "round,algorithm,alpha,seed,test_acc,train_loss,gen_loss,bytes_up,bytes_down,wall_ms";

/// One evaluated round; one rounds.csv row.
struct RoundRecord {
  std::size_t round = 0;
  std::string algorithm;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  double test_acc = 0.0;  // fraction in [0, 1]
  double train_loss = 0.0;
  std::optional<double> gen_loss;
  std::uint64_t bytes_up = 0;
  std::uint64_t bytes_down = 0;
  std::optional<double> wall_ms;
};

std::string format_record(const RoundRecord& record);

struct PreparedData {
  std::vector<Dataset> clients;
  Tensor proxy;  // unlabeled, never assigned to a client
  Dataset test;
};

/// Loads or synthesizes the dataset, subsamples it, carves out the proxy set
/// and partitions the rest across clients. Pure function of the config.
PreparedData prepare_data(const ExperimentConfig& config);

Federation make_federation(const ExperimentConfig& config, PreparedData data);

struct ExperimentResult {
  std::filesystem::path dir;
  std::vector<RoundRecord> records;
  double final_test_acc = 0.0;
  std::uint64_t total_bytes_up = 0;
  std::uint64_t total_bytes_down = 0;
  double wall_seconds = 0.0;
};

/// Runs every round and writes config.json, rounds.csv (flushed per row),
/// timing.csv, final.json and checkpoints/ under `out_dir`. Rows are emitted
/// every `eval_every` rounds. Progress lines go to `log` when non-null.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                                std::ostream* log = nullptr);

}  // namespace fedkd
