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


#include "fedkd/protocols/round.hpp"

#include <iostream>

#include "fedkd/error.hpp"
#include "fedkd/models/checkpoint.hpp"
#include "fedkd/protocols/parallel.hpp"

namespace fedkd {
namespace {

bool keeps_local_model(const RoundConfig& cfg) {
  return cfg.sharing == SharingMode::kPredictorOnly || cfg.algorithm == Algorithm::kFedDistill;
}

bool shares_stats(Algorithm a) { return a == Algorithm::kFedDistill || a == Algorithm::kFedDistillPlus; }

RoundStats run_round_impl(Federation& fed, bool partial) {
  const RoundConfig& cfg = fed.config;
  ServerState& server = fed.server;
  const int classes = server.model.num_classes();
  const std::size_t round = ++server.round;

  RoundStats stats;
  stats.round = round;
  auto server_rng = make_rng(cfg.seed, StreamTag::kServer, {round});
  stats.active = sample_active_users(cfg.num_users, cfg.active_users, server_rng);

  const auto downlink = broadcast_tensors(fed);
  stats.bytes_down = static_cast<std::uint64_t>(encoded_size(downlink)) * stats.active.size();

  const bool use_generator = cfg.algorithm == Algorithm::kFedGen && server.generator_steps_done > 0;
  const std::size_t n = stats.active.size();
  std::vector<std::optional<ClientUpdate>> results(n);
  std::vector<Classifier> trained(n);

  parallel_for(n, worker_threads(), [&](std::size_t slot) {
    const ClientState& client = fed.clients[stats.active[slot]];
    if (client.data.size() == 0) return;
    Classifier model = keeps_local_model(cfg) ? client.model : server.model;
    if (partial) model.set_predictor_tensors(server.model.predictor_tensors());

    auto rng = make_rng(cfg.seed, StreamTag::kClient, {client.id, round});
    const LocalOptions opts{cfg.local_steps, cfg.batch_size, cfg.learning_rate, cfg.batch_sampling};
    ClientUpdate update;
    switch (cfg.algorithm) {
      case Algorithm::kFedProx:
        update = local_update_fedprox(client.data, model, opts, cfg.proximal_mu, rng);
        break;
      case Algorithm::kFedDistill:
      case Algorithm::kFedDistillPlus:
        update = local_update_feddistill(client.data, model, &server.logit_stats, opts, cfg.distill_gamma, rng);
        break;
      case Algorithm::kFedGen: {
        SyntheticOptions synth{use_generator ? cfg.synthetic_batch : 0, cfg.distill_space, cfg.synthetic_weight};
        update = local_update_fedgen(client.data, model, server.generator, server.prior, opts, synth, rng);
        break;
      }
      default:
        update = local_update_sgd(client.data, model, opts, rng);
        break;
    }
    update.client_id = client.id;
    if (partial) restrict_to_predictor(update, model);
    results[slot] = std::move(update);
    trained[slot] = std::move(model);
  });

  std::vector<ClientUpdate> updates;
  std::vector<std::size_t> slots;
  for (std::size_t slot = 0; slot < n; ++slot) {
    if (!results[slot]) {
      stats.skipped.push_back(stats.active[slot]);
      std::cerr << "warning: round " << round << ": client " << stats.active[slot]
                << " has no data and was skipped\n";
      continue;
    }
    updates.push_back(std::move(*results[slot]));
    slots.push_back(slot);
  }
  if (updates.empty()) throw Error("round " + std::to_string(round) + ": every active client was skipped");

  for (std::size_t i = 0; i < updates.size(); ++i) {
    if (partial && upload_leaks_features(updates[i], trained[slots[i]])) {
      throw Error("privacy audit: client " + std::to_string(updates[i].client_id) +
                  " uplink contains extractor parameters");
    }
    stats.bytes_up += encoded_size(updates[i].wire_tensors());
    stats.train_loss += updates[i].train_loss;
  }
  stats.train_loss /= static_cast<double>(updates.size());

  // Aggregation and label prior.
  if (cfg.algorithm != Algorithm::kFedDistill) {
    auto mean = aggregate(updates);
    if (partial) {
      server.model.set_predictor_tensors(mean);
    } else {
      server.model.set_tensors(mean);
    }
  }
  if (shares_stats(cfg.algorithm)) server.logit_stats = merge_logit_stats(updates, classes);
  std::vector<LabelCounter> counters;
  for (const auto& u : updates) {
    counters.push_back(u.counter);
    server.cumulative_counts.add(u.counter);
  }
  server.prior = cfg.prior_mode == PriorMode::kRound
                     ? aggregate_prior(counters)
                     : aggregate_prior(std::span<const LabelCounter>(&server.cumulative_counts, 1));

  // Server-side knowledge transfer, using this round's uploads as teachers.
  if (cfg.algorithm == Algorithm::kFedGen) {
    std::vector<Teacher> teachers;
    for (std::size_t i = 0; i < updates.size(); ++i) teachers.push_back({&trained[slots[i]], &updates[i].counter});
    GeneratorOptions gopts{cfg.generator_steps, cfg.generator_batch, cfg.diversity_weight, cfg.weighted_ensemble,
                           cfg.distill_space};
    auto gen_rng = make_rng(cfg.seed, StreamTag::kGenerator, {round});
    auto report = train_generator(server.generator, server.generator_opt, server.prior, teachers, gopts, gen_rng);
    server.generator_steps_done += cfg.generator_steps;
    stats.generator_loss = report.loss;
  }
  if (cfg.algorithm == Algorithm::kFedDFusion) {
    std::vector<const Classifier*> teachers;
    for (auto slot : slots) teachers.push_back(&trained[slot]);
    auto fusion_rng = make_rng(cfg.seed, StreamTag::kFusion, {round});
    server_distill_fedfusion(server.model, teachers, fed.proxy,
                             {cfg.ensemble_steps, cfg.ensemble_batch, cfg.ensemble_lr}, fusion_rng);
  }

  // Client-side bookkeeping.
  for (std::size_t i = 0; i < updates.size(); ++i) {
    ClientState& client = fed.clients[updates[i].client_id];
    client.counter = updates[i].counter;
    ++client.rounds_active;
    Classifier& model = trained[slots[i]];
    if (cfg.algorithm == Algorithm::kFedEnsemble) server.ensemble[client.id] = model;
    if (keeps_local_model(cfg)) client.model = std::move(model);
  }
  return stats;
}

}  // namespace

Federation make_federation(const RoundConfig& config, const ClassifierSpec& model_spec, GeneratorSpec generator_spec,
                           std::vector<Dataset> client_data, Tensor proxy) {
  config.validate();
  if (client_data.size() != config.num_users) {
    throw ContractError("make_federation: " + std::to_string(client_data.size()) + " datasets for " +
                        std::to_string(config.num_users) + " users");
  }
  if (config.algorithm == Algorithm::kFedDFusion && (proxy.rank() != 2 || proxy.rows() == 0)) {
    throw ConfigError("feddfusion needs a non-empty proxy set (proxy_fraction > 0)");
  }
  Federation fed;
  fed.config = config;
  fed.proxy = std::move(proxy);

  auto init_rng = make_rng(config.seed, StreamTag::kModelInit);
  fed.server.model = Classifier::create(model_spec, init_rng);
  generator_spec.num_classes = model_spec.num_classes;
  generator_spec.output_dim =
      config.distill_space == DistillSpace::kLatent ? fed.server.model.latent_dim() : model_spec.input_dim;
  auto gen_rng = make_rng(config.seed, StreamTag::kGenerator);
  fed.server.generator = Generator::create(generator_spec, gen_rng);
  fed.server.generator_opt = Optimizer(OptimizerConfig::adam(config.generator_lr));
  fed.server.prior = LabelPrior::uniform(model_spec.num_classes);
  fed.server.cumulative_counts = LabelCounter(model_spec.num_classes);
  fed.server.logit_stats = LogitStats(model_spec.num_classes);

  for (std::size_t k = 0; k < client_data.size(); ++k) {
    ClientState client;
    client.id = k;
    client.data = std::move(client_data[k]);
    client.counter = LabelCounter(model_spec.num_classes);
    if (keeps_local_model(config)) client.model = fed.server.model;
    fed.clients.push_back(std::move(client));
  }
  return fed;
}

RoundStats run_round(Federation& fed) {
  if (fed.config.sharing != SharingMode::kFull) throw ContractError("run_round: config asks for predictor-only sharing");
  return run_round_impl(fed, false);
}

RoundStats run_round_partial(Federation& fed) {
  if (fed.config.sharing != SharingMode::kPredictorOnly) {
    throw ContractError("run_round_partial: config asks for full sharing");
  }
  if (!supports_partial(fed.config.algorithm)) {
    throw ConfigError(std::string(algorithm_name(fed.config.algorithm)) + " has no predictor-only variant");
  }
  return run_round_impl(fed, true);
}

RoundStats step_round(Federation& fed) {
  return fed.config.sharing == SharingMode::kFull ? run_round(fed) : run_round_partial(fed);
}

Classifier client_view(const Federation& fed, std::size_t client) {
  const auto& cfg = fed.config;
  if (cfg.sharing == SharingMode::kPredictorOnly) {
    Classifier view = fed.clients.at(client).model;
    view.set_predictor_tensors(fed.server.model.predictor_tensors());
    return view;
  }
  if (cfg.algorithm == Algorithm::kFedDistill) return fed.clients.at(client).model;
  return fed.server.model;
}

std::vector<Tensor> broadcast_tensors(const Federation& fed) {
  const auto& cfg = fed.config;
  const auto& server = fed.server;
  std::vector<Tensor> out;
  if (cfg.algorithm != Algorithm::kFedDistill) {
    out = cfg.sharing == SharingMode::kPredictorOnly ? server.model.predictor_tensors() : server.model.tensors();
  }
  if (cfg.algorithm == Algorithm::kFedGen) {
    for (auto& t : server.generator.tensors()) out.push_back(std::move(t));
    out.push_back(Tensor({server.prior.probs.size()}, server.prior.probs));
  }
  if (shares_stats(cfg.algorithm) && !server.logit_stats.empty()) {
    for (auto& t : server.logit_stats.tensors()) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace fedkd
