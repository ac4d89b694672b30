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
#include <string>
#include <string_view>

namespace fedkd {

enum class Algorithm { kFedAvg, kFedProx, kFedEnsemble, kFedDistill, kFedDistillPlus, kFedDFusion, kFedGen };
enum class SharingMode { kFull, kPredictorOnly };
/// Which client counters feed the label prior: this round's or all so far.
enum class PriorMode { kRound, kCumulative };
enum class BatchSampling { kReplacement, kEpoch };
/// Where the generator emits samples: the predictor's latent input, or the
/// raw input space (teachers are then whole classifiers).
enum class DistillSpace { kLatent, kInput };

std::string_view algorithm_name(Algorithm a);
Algorithm parse_algorithm(std::string_view s);
std::string_view sharing_name(SharingMode m);
SharingMode parse_sharing(std::string_view s);
std::string_view prior_mode_name(PriorMode m);
PriorMode parse_prior_mode(std::string_view s);
std::string_view batch_sampling_name(BatchSampling b);
BatchSampling parse_batch_sampling(std::string_view s);
std::string_view distill_space_name(DistillSpace d);
DistillSpace parse_distill_space(std::string_view s);

/// Algorithms that have a predictor-only variant.
bool supports_partial(Algorithm a);

struct RoundConfig {
  Algorithm algorithm = Algorithm::kFedGen;
  SharingMode sharing = SharingMode::kFull;
  std::size_t num_users = 20;
  std::size_t active_users = 10;
  std::size_t local_steps = 20;
  std::size_t batch_size = 32;
  std::size_t synthetic_batch = 32;
  double synthetic_weight = 1.0;
  double learning_rate = 0.01;

  // Server-side generator (FedGen).
  double generator_lr = 1e-4;
  std::size_t generator_steps = 20;
  std::size_t generator_batch = 128;
  double diversity_weight = 1.0;
  bool weighted_ensemble = true;
  DistillSpace distill_space = DistillSpace::kLatent;

  double proximal_mu = 0.1;
  double distill_gamma = 0.1;

  // Server-side ensemble distillation (FedDFusion).
  double ensemble_lr = 1e-4;
  std::size_t ensemble_steps = 20;
  std::size_t ensemble_batch = 128;

  PriorMode prior_mode = PriorMode::kRound;
  BatchSampling batch_sampling = BatchSampling::kReplacement;
  std::size_t rounds = 200;
  std::uint64_t seed = 1;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

}  // namespace fedkd
