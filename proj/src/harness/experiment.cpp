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


#include "fedkd/harness/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "fedkd/error.hpp"
#include "fedkd/harness/evaluate.hpp"
#include "fedkd/models/checkpoint.hpp"

namespace fedkd {
namespace {

namespace fs = std::filesystem;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::uint64_t derived_seed(std::uint64_t seed, StreamTag tag, std::uint64_t key) {
  auto rng = make_rng(seed, tag, {key});
  return rng();
}

// How the generator was trained; recorded with every FedGen artifact.
nlohmann::json generator_metadata(const RoundConfig& rc) {
  nlohmann::json g;
  g["diversity_loss"] = "mean over same-label pairs of |eps_i - eps_j|_1 / (|z_i - z_j|_1 + 1e-8)";
  g["diversity_weight"] = rc.diversity_weight;
  g["steps_per_round"] = rc.generator_steps;
  g["batch"] = rc.generator_batch;
  g["lr"] = rc.generator_lr;
  g["weighted_ensemble"] = rc.weighted_ensemble;
  g["space"] = distill_space_name(rc.distill_space);
  return g;
}

void write_checkpoint(const fs::path& base, const Federation& fed, std::size_t round) {
  auto tensors = fed.server.model.tensors();
  const std::size_t classifier_tensors = tensors.size();
  if (fed.config.algorithm == Algorithm::kFedGen) {
    for (auto& t : fed.server.generator.tensors()) tensors.push_back(std::move(t));
  }
  nlohmann::json meta;
  meta["round"] = round;
  meta["algorithm"] = algorithm_name(fed.config.algorithm);
  meta["sharing"] = sharing_name(fed.config.sharing);
  meta["classifier_tensors"] = classifier_tensors;
  meta["generator_tensors"] = tensors.size() - classifier_tensors;
  if (fed.config.algorithm == Algorithm::kFedGen) meta["generator"] = generator_metadata(fed.config);
  save_checkpoint(base, tensors, meta);
}

}  // namespace

std::string format_record(const RoundRecord& r) {
  std::string line = std::to_string(r.round) + "," + r.algorithm + "," + fmt("%g", r.alpha) + "," +
                     std::to_string(r.seed) + "," + fmt("%.6f", r.test_acc) + "," + fmt("%.6f", r.train_loss) + ",";
  if (r.gen_loss) line += fmt("%.6f", *r.gen_loss);
  line += "," + std::to_string(r.bytes_up) + "," + std::to_string(r.bytes_down) + ",";
  if (r.wall_ms) line += fmt("%.1f", *r.wall_ms);
  return line;
}

PreparedData prepare_data(const ExperimentConfig& config) {
  config.validate();
  const std::uint64_t seed = config.round.seed;
  PreparedData out;
  Dataset pool;
  Partition native;
  if (config.dataset == DatasetKind::kPrototype) {
    auto task = make_prototype(seed, config.prototype);
    pool = std::move(task.pool);
    out.test = std::move(task.test);
    native = std::move(task.partition);
  } else {
    pool = load_idx(config.train_images, config.train_labels);
    out.test = load_idx(config.test_images, config.test_labels, pool.num_classes);
  }

  if (config.partition == PartitionKind::kPrototype) {
    for (const auto& idx : native.clients) out.clients.push_back(pool.subset(idx));
    return out;
  }

  if (config.subsample_fraction < 1.0) {
    const auto keep = stratified_sample(pool.labels, pool.num_classes, config.subsample_fraction,
                                        derived_seed(seed, StreamTag::kData, 0));
    pool = pool.subset(keep);
  }
  if (config.proxy_fraction > 0.0) {
    const auto proxy_idx = stratified_sample(pool.labels, pool.num_classes, config.proxy_fraction,
                                             derived_seed(seed, StreamTag::kData, 1));
    out.proxy = pool.subset(proxy_idx).features;  // labels dropped
    std::vector<bool> taken(pool.size(), false);
    for (auto i : proxy_idx) taken[i] = true;
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!taken[i]) rest.push_back(i);
    }
    pool = pool.subset(rest);
  }
  const auto partition = dirichlet_partition(pool.labels, pool.num_classes, config.round.num_users, config.alpha,
                                             derived_seed(seed, StreamTag::kPartition, 0));
  for (const auto& idx : partition.clients) out.clients.push_back(pool.subset(idx));
  return out;
}

Federation make_federation(const ExperimentConfig& config, PreparedData data) {
  if (data.clients.empty()) throw ContractError("make_federation: no client data");
  const auto& first = data.clients.front();
  const auto spec = config.classifier_spec(first.feature_dim(), first.num_classes);
  return make_federation(config.round, spec, config.generator_spec(), std::move(data.clients), std::move(data.proxy));
}

ExperimentResult run_experiment(const ExperimentConfig& config, const fs::path& out_dir, std::ostream* log) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  fs::create_directories(out_dir / "checkpoints");
  {
    std::ofstream cfg_out(out_dir / "config.json");
    cfg_out << to_json(config).dump(2) << '\n';
  }

  auto data = prepare_data(config);
  const Dataset test = data.test;
  Federation fed = make_federation(config, std::move(data));

  ExperimentResult result;
  result.dir = out_dir;
  std::ofstream csv(out_dir / "rounds.csv");
  std::ofstream timing(out_dir / "timing.csv");
  if (!csv || !timing) throw Error("cannot write results under " + out_dir.string());
  csv << kRoundsCsvHeader << '\n' << std::flush;
  timing << "round,wall_ms\n";

  const auto& rc = config.round;
  std::optional<double> last_acc;
  for (std::size_t r = 1; r <= rc.rounds; ++r) {
    const auto t0 = Clock::now();
    const RoundStats stats = step_round(fed);
    result.total_bytes_up += stats.bytes_up;
    result.total_bytes_down += stats.bytes_down;

    last_acc.reset();
    if (r % config.eval_every == 0) {
      RoundRecord rec;
      rec.round = r;
      rec.algorithm = std::string(algorithm_name(rc.algorithm));
      if (rc.sharing == SharingMode::kPredictorOnly) rec.algorithm += "-partial";
      rec.alpha = config.alpha;
      rec.seed = rc.seed;
      rec.test_acc = evaluate_federation(fed, test);
      rec.train_loss = stats.train_loss;
      rec.gen_loss = stats.generator_loss;
      rec.bytes_up = stats.bytes_up;
      rec.bytes_down = stats.bytes_down;
      const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      if (config.record_wall_time) rec.wall_ms = ms;
      csv << format_record(rec) << '\n' << std::flush;
      last_acc = rec.test_acc;
      if (log) *log << "[" << config.run_id << "] round " << r << "/" << rc.rounds << " acc " << fmt("%.4f", rec.test_acc)
                    << " loss " << fmt("%.4f", rec.train_loss) << '\n';
      result.records.push_back(std::move(rec));
    }
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    timing << r << ',' << fmt("%.1f", ms) << '\n';
    if (config.checkpoint_every > 0 && r % config.checkpoint_every == 0) {
      write_checkpoint(out_dir / "checkpoints" / ("round_" + std::to_string(r)), fed, r);
    }
  }

  result.final_test_acc = last_acc ? *last_acc : evaluate_federation(fed, test);
  write_checkpoint(out_dir / "checkpoints" / "final", fed, rc.rounds);
  result.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();

  nlohmann::json fin;
  fin["run_id"] = config.run_id;
  fin["algorithm"] = algorithm_name(rc.algorithm);
  fin["sharing"] = sharing_name(rc.sharing);
  fin["alpha"] = config.alpha;
  fin["seed"] = rc.seed;
  fin["rounds"] = rc.rounds;
  fin["final_test_acc"] = result.final_test_acc;
  fin["total_bytes_up"] = result.total_bytes_up;
  fin["total_bytes_down"] = result.total_bytes_down;
  fin["wall_seconds"] = result.wall_seconds;
  if (rc.algorithm == Algorithm::kFedGen) fin["generator"] = generator_metadata(rc);
  std::ofstream(out_dir / "final.json") << fin.dump(2) << '\n';
  return result;
}

}  // namespace fedkd
