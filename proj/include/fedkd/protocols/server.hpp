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
#include <map>
#include <span>
#include <vector>

#include "fedkd/data/dataset.hpp"
#include "fedkd/models/classifier.hpp"
#include "fedkd/models/generator.hpp"
#include "fedkd/models/logit_stats.hpp"
#include "fedkd/numerics/optimizer.hpp"
#include "fedkd/protocols/client.hpp"
#include "fedkd/rng.hpp"

namespace fedkd {

struct ServerState {
  /// Global model. In PredictorOnly mode only its predictor block is shared.
  Classifier model;
  Generator generator;
  Optimizer generator_opt{OptimizerConfig::adam(1e-4)};
  std::size_t generator_steps_done = 0;
  LabelPrior prior;
  LabelCounter cumulative_counts;
  /// FedDistill(+): count-weighted merge of last round's client statistics.
  LogitStats logit_stats;
  /// FedEnsemble: latest uploaded model of every client seen so far.
  std::map<std::size_t, Classifier> ensemble;
  std::size_t round = 0;
};

/// `count` distinct ids drawn uniformly from [0, K), returned ascending.
std::vector<std::size_t> sample_active_users(std::size_t num_users, std::size_t count, Rng& rng);

/// Element-wise unweighted mean of the payloads, accumulated in ascending
/// client-id order whatever the order of `updates`.
std::vector<Tensor> aggregate(std::span<const ClientUpdate> updates);

/// Count-weighted merge of the updates' logit statistics, ascending id order.
LogitStats merge_logit_stats(std::span<const ClientUpdate> updates, int num_classes);

/// Frozen teacher for generator training. In latent space only the predictor
/// is consulted; in input space the whole classifier is.
struct Teacher {
  const Classifier* model = nullptr;
  const LabelCounter* counts = nullptr;  // required when weighting
};

struct GeneratorOptions {
  std::size_t steps = 20;
  std::size_t batch = 128;
  double diversity_weight = 1.0;
  bool weighted = true;
  DistillSpace space = DistillSpace::kLatent;
};

struct GeneratorReport {
  double loss = 0.0;  // mean over steps of CE + diversity term
  double ce = 0.0;
  double diversity = 0.0;
};

/// Adam steps on the generator against the teacher ensemble. Teacher
/// parameters are never written. Labels are drawn from `prior`; with
/// weighting the ensemble weight of teacher k on class c is
/// n_k^c / sum_j n_j^c (uniform for a class no teacher has seen).
GeneratorReport train_generator(Generator& generator, Optimizer& opt, const LabelPrior& prior,
                                std::span<const Teacher> teachers, const GeneratorOptions& opts, Rng& rng);

/// Mean per-model softmax probabilities.
Tensor ensemble_predict(std::span<const Classifier* const> models, const Tensor& x);

struct FusionOptions {
  std::size_t steps = 20;
  std::size_t batch = 128;
  double learning_rate = 1e-4;
};

/// Adam steps minimizing KL(softmax(mean teacher logits) || softmax(student))
/// on proxy mini-batches. Returns the KL of every step in order.
std::vector<double> server_distill_fedfusion(Classifier& student, std::span<const Classifier* const> teachers,
                                             const Tensor& proxy, const FusionOptions& opts, Rng& rng);

}  // namespace fedkd
