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

#include "fedkd/protocols/client.hpp"
#include "fedkd/protocols/config.hpp"
#include "fedkd/protocols/server.hpp"

namespace fedkd {

/// Server, clients and the config that drives them.
struct Federation {
  RoundConfig config;
  ServerState server;
  std::vector<ClientState> clients;
  /// Unlabeled proxy features for FedDFusion; held by the server only.
  Tensor proxy;
};

/// Builds a federation with one client per dataset. The global model and
/// the generator are initialized from the config seed; every client that
/// keeps a local model starts from the global initialization.
Federation make_federation(const RoundConfig& config, const ClassifierSpec& model_spec, GeneratorSpec generator_spec,
                           std::vector<Dataset> client_data, Tensor proxy = {});

struct RoundStats {
  std::size_t round = 0;  // 1-based
  std::vector<std::size_t> active;
  std::vector<std::size_t> skipped;  // active clients with empty partitions
  double train_loss = 0.0;           // mean over contributing clients
  std::optional<double> generator_loss;
  std::uint64_t bytes_up = 0;
  std::uint64_t bytes_down = 0;
};

/// One round with full parameter sharing: broadcast, parallel local updates,
/// aggregation, then the algorithm's server phase (generator training for
/// FedGen, ensemble distillation for FedDFusion).
RoundStats run_round(Federation& fed);

/// One round exchanging only the predictor block; clients keep training
/// their private extractors. Every uplink is audited for extractor bytes.
RoundStats run_round_partial(Federation& fed);

/// Dispatches on config.sharing.
RoundStats step_round(Federation& fed);

/// The model client k would predict with right now: its private extractor
/// with the global predictor (PredictorOnly), its own model (FedDistill),
/// or the global model.
Classifier client_view(const Federation& fed, std::size_t client);

/// Tensors the server sends to one active client this round.
std::vector<Tensor> broadcast_tensors(const Federation& fed);

}  // namespace fedkd
