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


#include "fedkd/harness/prototype_study.hpp"

#include <chrono>

#include "fedkd/harness/evaluate.hpp"
#include "fedkd/numerics/losses.hpp"
#include "fedkd/protocols/client.hpp"
#include "fedkd/protocols/server.hpp"

namespace fedkd {

PrototypeStudyResult run_prototype_study(std::uint64_t seed, const PrototypeStudyOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  PrototypeStudyResult res;
  const auto task = make_prototype(seed, o.data);
  const int classes = task.pool.num_classes;

  ClassifierSpec spec;
  spec.input_dim = task.pool.feature_dim();
  spec.hidden = o.hidden;
  spec.num_classes = classes;
  auto init_rng = make_rng(seed, StreamTag::kModelInit);
  const Classifier init = Classifier::create(spec, init_rng);
  const LocalOptions local{o.local_steps, o.batch_size, o.learning_rate, BatchSampling::kReplacement};

  // Round one: local training from a shared initialization.
  std::array<Classifier, 3> users;
  std::vector<ClientUpdate> updates;
  for (std::size_t k = 0; k < 3; ++k) {
    users[k] = init;
    auto rng = make_rng(seed, StreamTag::kClient, {k, 1});
    updates.push_back(local_update_sgd(task.users[k], users[k], local, rng));
    updates.back().client_id = k;
    res.before[k] = evaluate(users[k], task.test);
  }

  Classifier averaged = init;
  averaged.set_tensors(aggregate(updates));
  res.averaged = evaluate(averaged, task.test);

  Classifier oracle = init;
  {
    auto rng = make_rng(seed, StreamTag::kClient, {1000, 1});
    LocalOptions pooled = local;
    pooled.steps = o.oracle_steps;
    (void)local_update_sgd(task.pool, oracle, pooled, rng);
  }
  res.oracle = evaluate(oracle, task.test);

  // Server: learn a conditional generator against the user ensemble.
  GeneratorSpec gspec;
  gspec.noise_dim = o.generator_noise_dim;
  gspec.hidden_dim = o.generator_hidden_dim;
  gspec.output_dim = spec.input_dim;
  gspec.num_classes = classes;
  auto gen_init = make_rng(seed, StreamTag::kGenerator);
  Generator generator = Generator::create(gspec, gen_init);
  Optimizer gen_opt(OptimizerConfig::adam(o.generator_lr));
  std::vector<LabelCounter> counters;
  for (const auto& u : updates) counters.push_back(u.counter);
  const LabelPrior prior = aggregate_prior(counters);
  std::vector<Teacher> teachers;
  for (std::size_t k = 0; k < 3; ++k) teachers.push_back({&users[k], &updates[k].counter});
  GeneratorOptions gopts{o.generator_steps, o.generator_batch, o.diversity_weight, o.weighted, DistillSpace::kInput};
  auto gen_rng = make_rng(seed, StreamTag::kGenerator, {1});
  res.generator_ce = train_generator(generator, gen_opt, prior, teachers, gopts, gen_rng).ce;

  // Fixed probe batch for the per-user synthetic CE.
  std::vector<int> probe_labels(256);
  {
    auto probe_rng = make_rng(seed, StreamTag::kEval);
    std::discrete_distribution<int> dist(prior.probs.begin(), prior.probs.end());
    for (int& y : probe_labels) y = dist(probe_rng);
  }
  auto probe_rng = make_rng(seed, StreamTag::kEval, {1});
  const Tensor probe = generator.generate(probe_labels, probe_rng).z;

  // Round two: every user distills from generator samples next to its own data.
  const LocalOptions kd{o.kd_steps, o.batch_size, o.learning_rate, BatchSampling::kReplacement};
  for (std::size_t k = 0; k < 3; ++k) {
    res.synthetic_ce_before[k] = cross_entropy_with_logits(users[k].logits(probe), probe_labels).value;
    auto rng = make_rng(seed, StreamTag::kClient, {k, 2});
    (void)local_update_fedgen(task.users[k], users[k], generator, prior, kd, {o.synthetic_batch, DistillSpace::kInput},
                              rng);
    res.synthetic_ce_after[k] = cross_entropy_with_logits(users[k].logits(probe), probe_labels).value;
    res.after[k] = evaluate(users[k], task.test);
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace fedkd
