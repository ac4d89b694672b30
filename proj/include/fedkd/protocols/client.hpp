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
#include <optional>
#include <vector>

#include "fedkd/data/dataset.hpp"
#include "fedkd/models/classifier.hpp"
#include "fedkd/models/generator.hpp"
#include "fedkd/models/logit_stats.hpp"
#include "fedkd/protocols/config.hpp"
#include "fedkd/rng.hpp"

namespace fedkd {

struct ClientState {
  std::size_t id = 0;
  Dataset data;
  /// Persistent local model: the private extractor in PredictorOnly mode and
  /// the never-averaged model under FedDistill. Unused otherwise.
  Classifier model;
  /// Label counts of the batches drawn in the client's latest active round.
  LabelCounter counter;
  std::size_t rounds_active = 0;
};

/// What a client sends back to the server.
struct ClientUpdate {
  std::size_t client_id = 0;
  std::vector<Tensor> payload;  // every tensor of theta_k, or theta_k^p only
  LabelCounter counter;
  std::optional<LogitStats> stats;
  std::size_t samples = 0;
  double train_loss = 0.0;  // mean per-step objective

  /// Tensors actually serialized on the uplink.
  std::vector<Tensor> wire_tensors() const;
};

struct LocalOptions {
  std::size_t steps = 20;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  BatchSampling sampling = BatchSampling::kReplacement;
};

/// Mini-batch index stream over [0, n). With replacement every index is an
/// independent std::uniform_int_distribution<std::size_t>(0, n - 1) draw from
/// the supplied generator; epoch mode walks fresh std::shuffle permutations.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch, BatchSampling mode, Rng& rng);
  std::vector<std::size_t> next();

 private:
  std::size_t n_;
  std::size_t batch_;
  BatchSampling mode_;
  Rng& rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

// Every local update trains `model` in place starting from its current
// parameters (theta_init) and returns an update carrying all of its tensors.
// Batches come from `rng`, which the round driver keys by (seed, client, round).

ClientUpdate local_update_sgd(const Dataset& data, Classifier& model, const LocalOptions& opts, Rng& rng);

/// Adds (mu/2)||theta - theta_init||^2 to every step.
ClientUpdate local_update_fedprox(const Dataset& data, Classifier& model, const LocalOptions& opts, double mu,
                                  Rng& rng);

struct SyntheticOptions {
  std::size_t batch = 32;  // B_G; 0 disables the synthetic term
  DistillSpace space = DistillSpace::kLatent;
  double weight = 1.0;  // coefficient on the synthetic CE
};

/// Adds CE on generator samples (labels drawn from `prior`) to every step.
/// The generator is read-only; in latent space only the predictor sees the
/// synthetic term.
ClientUpdate local_update_fedgen(const Dataset& data, Classifier& model, const Generator& generator,
                                 const LabelPrior& prior, const LocalOptions& opts, const SyntheticOptions& synth,
                                 Rng& rng);

/// Adds gamma * (1/B) sum_i ||logits_i - target[y_i]||^2, skipping classes the
/// target has never seen. `targets` may be empty (first round). The update
/// carries the label-wise logit means observed during training.
ClientUpdate local_update_feddistill(const Dataset& data, Classifier& model, const LogitStats* targets,
                                     const LocalOptions& opts, double gamma, Rng& rng);

/// Drops the extractor block from an update's payload.
void restrict_to_predictor(ClientUpdate& update, const Classifier& model);

/// True when any extractor weight window of `model` appears verbatim in the
/// serialized uplink of `update`.
bool upload_leaks_features(const ClientUpdate& update, const Classifier& model);

}  // namespace fedkd
