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


#include "fedkd/protocols/client.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

#include "fedkd/error.hpp"
#include "fedkd/models/checkpoint.hpp"
#include "fedkd/numerics/losses.hpp"
#include "fedkd/numerics/optimizer.hpp"

namespace fedkd {
namespace {

struct Regularizers {
  // FedProx
  double mu = 0.0;
  const std::vector<Tensor>* anchor = nullptr;
  // FedDistill
  double gamma = 0.0;
  const LogitStats* targets = nullptr;
  bool collect_stats = false;
  // FedGen
  const Generator* generator = nullptr;
  const LabelPrior* prior = nullptr;
  SyntheticOptions synth;
};

ClientUpdate train_local(const Dataset& data, Classifier& model, const LocalOptions& opts, const Regularizers& reg,
                         Rng& rng) {
  if (data.size() == 0) throw ContractError("local update: empty partition");
  const int classes = model.num_classes();
  ClientUpdate update;
  update.counter = LabelCounter(classes);
  update.samples = data.size();
  if (reg.collect_stats) update.stats = LogitStats(classes);

  const bool synthetic = reg.generator != nullptr && reg.synth.batch > 0;
  std::vector<std::vector<double>> target_means;
  if (reg.targets && reg.gamma > 0.0) {
    for (int c = 0; c < classes; ++c) target_means.push_back(reg.targets->mean(c));
  }
  std::optional<std::discrete_distribution<int>> label_dist;
  if (synthetic) label_dist.emplace(reg.prior->probs.begin(), reg.prior->probs.end());

  Optimizer sgd(OptimizerConfig::sgd(opts.learning_rate));
  BatchSampler sampler(data.size(), opts.batch_size, opts.sampling, rng);
  std::vector<int> yb(opts.batch_size);
  double loss_sum = 0.0;

  for (std::size_t step = 0; step < opts.steps; ++step) {
    const auto idx = sampler.next();
    for (std::size_t i = 0; i < idx.size(); ++i) yb[i] = data.labels[idx[i]];
    auto pass = model.forward(gather_rows(data.features, idx));
    auto ce = cross_entropy_with_logits(pass.logits, yb);
    double loss = ce.value;
    update.counter.add(yb);
    if (update.stats) update.stats->update(pass.logits, yb);

    if (!target_means.empty()) {
      const double inv_b = 1.0 / static_cast<double>(yb.size());
      double penalty = 0.0;
      for (std::size_t i = 0; i < yb.size(); ++i) {
        if (!reg.targets->has_class(yb[i])) continue;
        const auto& mean = target_means[static_cast<std::size_t>(yb[i])];
        auto row = pass.logits.row(i);
        auto grad = ce.grad.row(i);
        for (std::size_t c = 0; c < row.size(); ++c) {
          const double d = row[c] - mean[c];
          penalty += d * d;
          grad[c] += 2.0 * reg.gamma * inv_b * d;
        }
      }
      loss += reg.gamma * inv_b * penalty;
    }

    auto grads = model.backward(pass, ce.grad);

    if (synthetic) {
      std::vector<int> yhat(reg.synth.batch);
      for (int& y : yhat) y = (*label_dist)(rng);
      auto sample = reg.generator->generate(yhat, rng);
      if (reg.synth.space == DistillSpace::kLatent) {
        auto lp = model.forward_latent(sample.z);
        auto ce_syn = cross_entropy_with_logits(lp.logits, yhat);
        scale_inplace(ce_syn.grad, reg.synth.weight);
        add_predictor_grads(grads, model.backward_latent(lp, ce_syn.grad));
        loss += reg.synth.weight * ce_syn.value;
      } else {
        auto sp = model.forward(sample.z);
        auto ce_syn = cross_entropy_with_logits(sp.logits, yhat);
        scale_inplace(ce_syn.grad, reg.synth.weight);
        add_grads(grads, model.backward(sp, ce_syn.grad));
        loss += reg.synth.weight * ce_syn.value;
      }
    }

    if (reg.mu > 0.0) {
      auto params = model.parameters();
      double dist = 0.0;
      for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& a = (*reg.anchor)[i];
        dist += squared_distance(*params[i], a);
        auto g = grads[i].values();
        auto p = params[i]->values();
        for (std::size_t j = 0; j < g.size(); ++j) g[j] += reg.mu * (p[j] - a[j]);
      }
      loss += 0.5 * reg.mu * dist;
    }

    sgd.step(model.parameters(), grads);
    loss_sum += loss;
  }
  update.train_loss = opts.steps ? loss_sum / static_cast<double>(opts.steps) : 0.0;
  update.payload = model.tensors();
  return update;
}

}  // namespace

std::vector<Tensor> ClientUpdate::wire_tensors() const {
  std::vector<Tensor> out = payload;
  Tensor counts({counter.counts().size()});
  for (std::size_t c = 0; c < counts.size(); ++c) counts[c] = static_cast<double>(counter.counts()[c]);
  out.push_back(std::move(counts));
  if (stats) {
    for (auto& t : stats->tensors()) out.push_back(std::move(t));
  }
  return out;
}

BatchSampler::BatchSampler(std::size_t n, std::size_t batch, BatchSampling mode, Rng& rng)
    : n_(n), batch_(batch), mode_(mode), rng_(rng) {
  if (n == 0) throw ContractError("batch sampler: empty index range");
}

std::vector<std::size_t> BatchSampler::next() {
  std::vector<std::size_t> out(batch_);
  if (mode_ == BatchSampling::kReplacement) {
    std::uniform_int_distribution<std::size_t> pick(0, n_ - 1);
    for (auto& i : out) i = pick(rng_);
    return out;
  }
  for (auto& i : out) {
    if (cursor_ == order_.size()) {
      order_.resize(n_);
      std::iota(order_.begin(), order_.end(), std::size_t{0});
      std::shuffle(order_.begin(), order_.end(), rng_);
      cursor_ = 0;
    }
    i = order_[cursor_++];
  }
  return out;
}

ClientUpdate local_update_sgd(const Dataset& data, Classifier& model, const LocalOptions& opts, Rng& rng) {
  return train_local(data, model, opts, {}, rng);
}

ClientUpdate local_update_fedprox(const Dataset& data, Classifier& model, const LocalOptions& opts, double mu,
                                  Rng& rng) {
  const auto anchor = model.tensors();
  Regularizers reg;
  reg.mu = mu;
  reg.anchor = &anchor;
  return train_local(data, model, opts, reg, rng);
}

ClientUpdate local_update_fedgen(const Dataset& data, Classifier& model, const Generator& generator,
                                 const LabelPrior& prior, const LocalOptions& opts, const SyntheticOptions& synth,
                                 Rng& rng) {
  if (synth.batch > 0) {
    const std::size_t want = synth.space == DistillSpace::kLatent ? model.latent_dim() : model.spec().input_dim;
    if (generator.spec().output_dim != want) {
      throw ContractError("local_update_fedgen: generator emits " + std::to_string(generator.spec().output_dim) +
                          " features, classifier expects " + std::to_string(want));
    }
    if (prior.num_classes() != model.num_classes()) throw ContractError("local_update_fedgen: prior size mismatch");
  }
  Regularizers reg;
  reg.generator = &generator;
  reg.prior = &prior;
  reg.synth = synth;
  return train_local(data, model, opts, reg, rng);
}

ClientUpdate local_update_feddistill(const Dataset& data, Classifier& model, const LogitStats* targets,
                                     const LocalOptions& opts, double gamma, Rng& rng) {
  Regularizers reg;
  reg.gamma = gamma;
  reg.targets = targets && !targets->empty() ? targets : nullptr;
  reg.collect_stats = true;
  return train_local(data, model, opts, reg, rng);
}

void restrict_to_predictor(ClientUpdate& update, const Classifier& model) {
  if (update.payload.size() != model.feature_tensor_count() + 2) {
    throw ContractError("restrict_to_predictor: payload is not a full parameter set");
  }
  update.payload.erase(update.payload.begin(),
                       update.payload.begin() + static_cast<std::ptrdiff_t>(model.feature_tensor_count()));
}

bool upload_leaks_features(const ClientUpdate& update, const Classifier& model) {
  const auto blob = encode_tensors(update.wire_tensors());
  constexpr std::size_t kWindow = 4;
  for (const auto& layer : model.feature_layers()) {
    const auto w = layer.weights.values();
    if (w.size() < kWindow) continue;
    for (std::size_t start : {std::size_t{0}, (w.size() - kWindow) / 2, w.size() - kWindow}) {
      const auto* needle = reinterpret_cast<const std::uint8_t*>(w.data() + start);
      const std::size_t len = kWindow * sizeof(double);
      if (std::search(blob.begin(), blob.end(), needle, needle + len) != blob.end()) return true;
    }
  }
  return false;
}

}  // namespace fedkd
