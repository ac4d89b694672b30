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

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "fedkd/data/sources.hpp"

namespace fedkd {

/// One-round, three-user KD experiment on the 2D prototype. The generator
/// learns in the raw input space so that its samples are directly
/// comparable with the data.
struct PrototypeStudyOptions {
  PrototypeConfig data;
  std::vector<std::size_t> hidden = {32, 32};
  // Short local training leaves the users biased toward their majority class.
  std::size_t local_steps = 30;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  std::size_t oracle_steps = 600;

  std::size_t generator_noise_dim = 8;
  std::size_t generator_hidden_dim = 64;
  std::size_t generator_steps = 1000;
  std::size_t generator_batch = 128;
  double generator_lr = 1e-3;
  double diversity_weight = 0.1;
  // Count-weighted teachers let each owner's over-broad region dominate the
  // generator's samples; the plain mean distills better here.
  bool weighted = false;

  std::size_t kd_steps = 400;
  std::size_t synthetic_batch = 64;
};

struct PrototypeStudyResult {
  std::array<double, 3> before{};  // user accuracy on the global test set
  std::array<double, 3> after{};
  double averaged = 0.0;  // parameter average of the three local models
  double oracle = 0.0;    // trained on the pooled data
  /// Mean CE of each user on a fixed batch of generator samples, before and
  /// after its distillation pass.
  std::array<double, 3> synthetic_ce_before{};
  std::array<double, 3> synthetic_ce_after{};
  double generator_ce = 0.0;  // ensemble CE over the last generator steps
  double seconds = 0.0;
};

PrototypeStudyResult run_prototype_study(std::uint64_t seed, const PrototypeStudyOptions& options = {});

}  // namespace fedkd
