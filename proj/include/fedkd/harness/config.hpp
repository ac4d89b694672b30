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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedkd/data/sources.hpp"
#include "fedkd/models/classifier.hpp"
#include "fedkd/models/generator.hpp"
#include "fedkd/protocols/config.hpp"

namespace fedkd {

enum class DatasetKind { kPrototype, kIdx };
enum class PartitionKind { kDirichlet, kPrototype };

/// Everything a run needs. Serializes to a flat JSON object; defaults follow
/// the reference MNIST setting.
struct ExperimentConfig {
  std::string run_id = "run";

  DatasetKind dataset = DatasetKind::kIdx;
  std::string train_images = "data/mnist/train-images-idx3-ubyte";
  std::string train_labels = "data/mnist/train-labels-idx1-ubyte";
  std::string test_images = "data/mnist/t10k-images-idx3-ubyte";
  std::string test_labels = "data/mnist/t10k-labels-idx1-ubyte";
  double subsample_fraction = 1.0;
  double proxy_fraction = 0.0;
  PrototypeConfig prototype;
  PartitionKind partition = PartitionKind::kDirichlet;
  double alpha = 0.1;

  RoundConfig round;
  std::vector<std::size_t> hidden_layers = {784, 32};
  std::string hidden_activation = "relu";
  std::size_t generator_noise_dim = 32;
  std::size_t generator_hidden_dim = 256;

  std::size_t eval_every = 1;
  std::size_t checkpoint_every = 0;  // 0: final checkpoint only
  bool record_wall_time = false;     // fill rounds.csv wall_ms (breaks byte-identity)

  ClassifierSpec classifier_spec(std::size_t input_dim, int num_classes) const;
  GeneratorSpec generator_spec() const;
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys and bad values throw ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace fedkd
