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


#include "fedkd/protocols/server.hpp"

#include <algorithm>
#include <numeric>

#include "fedkd/error.hpp"
#include "fedkd/numerics/losses.hpp"

namespace fedkd {
namespace {

std::vector<const ClientUpdate*> sorted_by_id(std::span<const ClientUpdate> updates) {
  std::vector<const ClientUpdate*> order;
  for (const auto& u : updates) order.push_back(&u);
  std::sort(order.begin(), order.end(),
            [](const ClientUpdate* a, const ClientUpdate* b) { return a->client_id < b->client_id; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i]->client_id == order[i - 1]->client_id) {
      throw ContractError("aggregate: duplicate update from client " + std::to_string(order[i]->client_id));
    }
  }
  return order;
}

}  // namespace

std::vector<std::size_t> sample_active_users(std::size_t num_users, std::size_t count, Rng& rng) {
  if (count < 1 || count > num_users) {
    throw ContractError("sample_active_users: cannot pick " + std::to_string(count) + " of " +
                        std::to_string(num_users) + " users");
  }
  std::vector<std::size_t> ids(num_users);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, num_users - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(count);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<Tensor> aggregate(std::span<const ClientUpdate> updates) {
  if (updates.empty()) throw ContractError("aggregate: no updates");
  const auto order = sorted_by_id(updates);
  std::vector<Tensor> mean;
  for (const Tensor& t : order.front()->payload) mean.emplace_back(t.shape());
  for (const auto* u : order) {
    if (u->payload.size() != mean.size()) {
      throw ContractError("aggregate: client " + std::to_string(u->client_id) + " sent " +
                          std::to_string(u->payload.size()) + " tensors, expected " + std::to_string(mean.size()));
    }
    for (std::size_t i = 0; i < mean.size(); ++i) add_inplace(mean[i], u->payload[i]);
  }
  const double inv = 1.0 / static_cast<double>(order.size());
  for (auto& t : mean) scale_inplace(t, inv);
  return mean;
}

LogitStats merge_logit_stats(std::span<const ClientUpdate> updates, int num_classes) {
  LogitStats merged(num_classes);
  for (const auto* u : sorted_by_id(updates)) {
    if (u->stats) merged.merge(*u->stats);
  }
  return merged;
}

GeneratorReport train_generator(Generator& generator, Optimizer& opt, const LabelPrior& prior,
                                std::span<const Teacher> teachers, const GeneratorOptions& opts, Rng& rng) {
  if (teachers.empty()) throw ContractError("train_generator: no teachers");
  const int classes = prior.num_classes();
  const std::size_t k_count = teachers.size();
  for (const auto& t : teachers) {
    if (!t.model || t.model->num_classes() != classes) throw ContractError("train_generator: teacher class mismatch");
    if (opts.weighted && !t.counts) throw ContractError("train_generator: weighting needs teacher label counts");
  }

  // lambda[c][k]
  std::vector<std::vector<double>> lambda(static_cast<std::size_t>(classes),
                                          std::vector<double>(k_count, 1.0 / static_cast<double>(k_count)));
  if (opts.weighted) {
    for (int c = 0; c < classes; ++c) {
      double total = 0.0;
      for (const auto& t : teachers) total += static_cast<double>((*t.counts)[c]);
      if (total <= 0.0) continue;
      for (std::size_t k = 0; k < k_count; ++k) {
        lambda[static_cast<std::size_t>(c)][k] = static_cast<double>((*teachers[k].counts)[c]) / total;
      }
    }
  }

  std::discrete_distribution<int> label_dist(prior.probs.begin(), prior.probs.end());
  GeneratorReport report;
  std::vector<int> labels(opts.batch);
  for (std::size_t step = 0; step < opts.steps; ++step) {
    for (int& y : labels) y = label_dist(rng);
    auto sample = generator.generate(labels, rng);
    const std::size_t b = labels.size();

    Tensor ensemble({b, static_cast<std::size_t>(classes)});
    std::vector<Classifier::LatentPass> latent_passes;
    std::vector<Classifier::Pass> input_passes;
    for (std::size_t k = 0; k < k_count; ++k) {
      const Tensor* logits = nullptr;
      if (opts.space == DistillSpace::kLatent) {
        latent_passes.push_back(teachers[k].model->forward_latent(sample.z));
        logits = &latent_passes.back().logits;
      } else {
        input_passes.push_back(teachers[k].model->forward(sample.z));
        logits = &input_passes.back().logits;
      }
      for (std::size_t i = 0; i < b; ++i) {
        const double w = lambda[static_cast<std::size_t>(labels[i])][k];
        auto dst = ensemble.row(i);
        auto src = logits->row(i);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w * src[c];
      }
    }
    auto ce = cross_entropy_with_logits(ensemble, labels);

    Tensor dz(sample.z.shape());
    for (std::size_t k = 0; k < k_count; ++k) {
      Tensor dlogits = ce.grad;
      for (std::size_t i = 0; i < b; ++i) {
        const double w = lambda[static_cast<std::size_t>(labels[i])][k];
        for (double& v : dlogits.row(i)) v *= w;
      }
      Tensor dz_k;
      if (opts.space == DistillSpace::kLatent) {
        (void)teachers[k].model->backward_latent(latent_passes[k], dlogits, &dz_k);
      } else {
        (void)teachers[k].model->backward(input_passes[k], dlogits, &dz_k);
      }
      add_inplace(dz, dz_k);
    }

    double div_value = 0.0;
    if (opts.diversity_weight > 0.0) {
      auto div = diversity_loss(sample.z, sample.eps, labels);
      div_value = div.value;
      add_inplace(dz, div.grad, opts.diversity_weight);
    }
    auto grads = generator.backward(sample, dz);
    opt.step(generator.parameters(), grads);

    report.ce += ce.value;
    report.diversity += div_value;
    report.loss += ce.value + opts.diversity_weight * div_value;
  }
  if (opts.steps > 0) {
    const double inv = 1.0 / static_cast<double>(opts.steps);
    report.ce *= inv;
    report.diversity *= inv;
    report.loss *= inv;
  }
  return report;
}

Tensor ensemble_predict(std::span<const Classifier* const> models, const Tensor& x) {
  if (models.empty()) throw ContractError("ensemble_predict: no models");
  Tensor mean;
  for (const auto* m : models) {
    Tensor p = m->probs(x);
    if (mean.size() == 0) {
      mean = std::move(p);
    } else {
      add_inplace(mean, p);
    }
  }
  scale_inplace(mean, 1.0 / static_cast<double>(models.size()));
  return mean;
}

std::vector<double> server_distill_fedfusion(Classifier& student, std::span<const Classifier* const> teachers,
                                             const Tensor& proxy, const FusionOptions& opts, Rng& rng) {
  if (teachers.empty()) throw ContractError("fedfusion: no teachers");
  if (proxy.rank() != 2 || proxy.rows() == 0) throw ContractError("fedfusion: empty proxy set");
  Optimizer adam(OptimizerConfig::adam(opts.learning_rate));
  std::uniform_int_distribution<std::size_t> pick(0, proxy.rows() - 1);
  std::vector<std::size_t> idx(opts.batch);
  std::vector<double> trace;
  const double inv = 1.0 / static_cast<double>(teachers.size());
  for (std::size_t step = 0; step < opts.steps; ++step) {
    for (auto& i : idx) i = pick(rng);
    const Tensor x = gather_rows(proxy, idx);
    Tensor mean_logits;
    for (const auto* t : teachers) {
      Tensor l = t->logits(x);
      if (mean_logits.size() == 0) {
        mean_logits = std::move(l);
      } else {
        add_inplace(mean_logits, l);
      }
    }
    scale_inplace(mean_logits, inv);
    const Tensor target = softmax(mean_logits);
    auto pass = student.forward(x);
    auto kl = kl_divergence(target, pass.probs);
    auto grads = student.backward(pass, kl.grad);
    adam.step(student.parameters(), grads);
    trace.push_back(kl.value);
  }
  return trace;
}

}  // namespace fedkd
