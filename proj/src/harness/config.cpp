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


#include "fedkd/harness/config.hpp"

#include <fstream>
#include <functional>
#include <map>

#include "fedkd/error.hpp"

namespace fedkd {
namespace {

using json = nlohmann::json;

template <typename T>
T as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "': wrong type (" + v.dump() + ")");
  }
}

std::size_t as_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got " + v.dump());
  }
  return v.get<std::size_t>();
}

using Setter = std::function<void(ExperimentConfig&, const json&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto str = [&t](const char* key, std::string ExperimentConfig::*field) {
      t[key] = [field](ExperimentConfig& c, const json& v, const std::string& k) { c.*field = as<std::string>(v, k); };
    };
    auto num = [&t](const char* key, auto getter) {
      t[key] = [getter](ExperimentConfig& c, const json& v, const std::string& k) {
        if (!v.is_number()) throw ConfigError("config key '" + k + "': expected a number, got " + v.dump());
        getter(c) = v.get<double>();
      };
    };
    auto count = [&t](const char* key, auto getter) {
      t[key] = [getter](ExperimentConfig& c, const json& v, const std::string& k) { getter(c) = as_count(v, k); };
    };
    auto flag = [&t](const char* key, auto getter) {
      t[key] = [getter](ExperimentConfig& c, const json& v, const std::string& k) { getter(c) = as<bool>(v, k); };
    };

    str("run_id", &ExperimentConfig::run_id);
    t["dataset"] = [](ExperimentConfig& c, const json& v, const std::string& k) {
      const auto s = as<std::string>(v, k);
      if (s == "prototype") {
        c.dataset = DatasetKind::kPrototype;
      } else if (s == "idx") {
        c.dataset = DatasetKind::kIdx;
      } else {
        throw ConfigError("dataset: unknown value '" + s + "' (expected prototype|idx)");
      }
    };
    t["partition"] = [](ExperimentConfig& c, const json& v, const std::string& k) {
      const auto s = as<std::string>(v, k);
      if (s == "dirichlet") {
        c.partition = PartitionKind::kDirichlet;
      } else if (s == "prototype") {
        c.partition = PartitionKind::kPrototype;
      } else {
        throw ConfigError("partition: unknown value '" + s + "' (expected dirichlet|prototype)");
      }
    };
    str("train_images", &ExperimentConfig::train_images);
    str("train_labels", &ExperimentConfig::train_labels);
    str("test_images", &ExperimentConfig::test_images);
    str("test_labels", &ExperimentConfig::test_labels);
    num("subsample_fraction", [](ExperimentConfig& c) -> double& { return c.subsample_fraction; });
    num("proxy_fraction", [](ExperimentConfig& c) -> double& { return c.proxy_fraction; });
    count("prototype_samples_per_cluster",
          [](ExperimentConfig& c) -> std::size_t& { return c.prototype.samples_per_cluster; });
    count("prototype_test_per_cluster", [](ExperimentConfig& c) -> std::size_t& { return c.prototype.test_per_cluster; });
    num("prototype_radius", [](ExperimentConfig& c) -> double& { return c.prototype.radius; });
    num("prototype_sigma", [](ExperimentConfig& c) -> double& { return c.prototype.sigma; });
    num("prototype_major_share", [](ExperimentConfig& c) -> double& { return c.prototype.major_share; });
    num("alpha", [](ExperimentConfig& c) -> double& { return c.alpha; });

    t["algorithm"] = [](ExperimentConfig& c, const json& v, const std::string& k) {
      c.round.algorithm = parse_algorithm(as<std::string>(v, k));
    };
    t["sharing"] = [](ExperimentConfig& c, const json& v, const std::string& k) {
      c.round.sharing = parse_sharing(as<std::string>(v, k));
    };
    t["prior_mode"] = [](ExperimentConfig& c, const json& v, const std::string& k) {
      c.round.prior_mode = parse_prior_mode(as<std::string>(v, k));
    };
    t["batch_sampling"] = [](ExperimentConfig& c, const json& v, const std::string& k) {
      c.round.batch_sampling = parse_batch_sampling(as<std::string>(v, k));
    };
    t["distill_space"] = [](ExperimentConfig& c, const json& v, const std::string& k) {
      c.round.distill_space = parse_distill_space(as<std::string>(v, k));
    };
    count("num_users", [](ExperimentConfig& c) -> std::size_t& { return c.round.num_users; });
    count("active_users", [](ExperimentConfig& c) -> std::size_t& { return c.round.active_users; });
    count("local_steps", [](ExperimentConfig& c) -> std::size_t& { return c.round.local_steps; });
    count("batch_size", [](ExperimentConfig& c) -> std::size_t& { return c.round.batch_size; });
    count("synthetic_batch", [](ExperimentConfig& c) -> std::size_t& { return c.round.synthetic_batch; });
    num("synthetic_weight", [](ExperimentConfig& c) -> double& { return c.round.synthetic_weight; });
    num("learning_rate", [](ExperimentConfig& c) -> double& { return c.round.learning_rate; });
    num("generator_lr", [](ExperimentConfig& c) -> double& { return c.round.generator_lr; });
    count("generator_steps", [](ExperimentConfig& c) -> std::size_t& { return c.round.generator_steps; });
    count("generator_batch", [](ExperimentConfig& c) -> std::size_t& { return c.round.generator_batch; });
    num("diversity_weight", [](ExperimentConfig& c) -> double& { return c.round.diversity_weight; });
    flag("weighted_ensemble", [](ExperimentConfig& c) -> bool& { return c.round.weighted_ensemble; });
    num("proximal_mu", [](ExperimentConfig& c) -> double& { return c.round.proximal_mu; });
    num("distill_gamma", [](ExperimentConfig& c) -> double& { return c.round.distill_gamma; });
    num("ensemble_lr", [](ExperimentConfig& c) -> double& { return c.round.ensemble_lr; });
    count("ensemble_steps", [](ExperimentConfig& c) -> std::size_t& { return c.round.ensemble_steps; });
    count("ensemble_batch", [](ExperimentConfig& c) -> std::size_t& { return c.round.ensemble_batch; });
    count("rounds", [](ExperimentConfig& c) -> std::size_t& { return c.round.rounds; });
    t["seed"] = [](ExperimentConfig& c, const json& v, const std::string& k) {
      if (!v.is_number_unsigned()) throw ConfigError("config key '" + k + "': expected a non-negative integer");
      c.round.seed = v.get<std::uint64_t>();
    };

    t["hidden_layers"] = [](ExperimentConfig& c, const json& v, const std::string& k) {
      if (!v.is_array()) throw ConfigError("config key '" + k + "': expected an array of layer widths");
      c.hidden_layers.clear();
      for (const auto& w : v) c.hidden_layers.push_back(as_count(w, k));
    };
    str("hidden_activation", &ExperimentConfig::hidden_activation);
    count("generator_noise_dim", [](ExperimentConfig& c) -> std::size_t& { return c.generator_noise_dim; });
    count("generator_hidden_dim", [](ExperimentConfig& c) -> std::size_t& { return c.generator_hidden_dim; });
    count("eval_every", [](ExperimentConfig& c) -> std::size_t& { return c.eval_every; });
    count("checkpoint_every", [](ExperimentConfig& c) -> std::size_t& { return c.checkpoint_every; });
    flag("record_wall_time", [](ExperimentConfig& c) -> bool& { return c.record_wall_time; });
    return t;
  }();
  return table;
}

}  // namespace

ClassifierSpec ExperimentConfig::classifier_spec(std::size_t input_dim, int num_classes) const {
  ClassifierSpec spec;
  spec.input_dim = input_dim;
  spec.hidden = hidden_layers;
  spec.num_classes = num_classes;
  try {
    spec.hidden_activation = parse_activation(hidden_activation);
  } catch (const Error& e) {
    throw ConfigError(std::string("hidden_activation: ") + e.what());
  }
  return spec;
}

GeneratorSpec ExperimentConfig::generator_spec() const {
  GeneratorSpec spec;
  spec.noise_dim = generator_noise_dim;
  spec.hidden_dim = generator_hidden_dim;
  return spec;
}

void ExperimentConfig::validate() const {
  round.validate();
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(!run_id.empty(), "run_id must not be empty");
  require(subsample_fraction > 0.0 && subsample_fraction <= 1.0, "subsample_fraction must lie in (0, 1]");
  require(proxy_fraction >= 0.0 && proxy_fraction < 1.0, "proxy_fraction must lie in [0, 1)");
  require(alpha > 0.0, "alpha must be > 0");
  require(!hidden_layers.empty(), "hidden_layers must name at least one layer");
  for (auto w : hidden_layers) require(w > 0, "hidden_layers entries must be > 0");
  require(generator_noise_dim > 0 && generator_hidden_dim > 0, "generator dimensions must be > 0");
  require(eval_every >= 1, "eval_every must be >= 1");
  require(partition == PartitionKind::kDirichlet || (dataset == DatasetKind::kPrototype && round.num_users == 3),
          "partition=prototype needs dataset=prototype and num_users=3");
  require(prototype.major_share >= 0.0 && prototype.major_share <= 1.0, "prototype_major_share must lie in [0, 1]");
  require(prototype.sigma > 0.0, "prototype_sigma must be > 0");
  (void)classifier_spec(1, 1);
}

nlohmann::json to_json(const ExperimentConfig& c) {
  const auto& r = c.round;
  json j;
  j["run_id"] = c.run_id;
  j["dataset"] = c.dataset == DatasetKind::kPrototype ? "prototype" : "idx";
  j["train_images"] = c.train_images;
  j["train_labels"] = c.train_labels;
  j["test_images"] = c.test_images;
  j["test_labels"] = c.test_labels;
  j["subsample_fraction"] = c.subsample_fraction;
  j["proxy_fraction"] = c.proxy_fraction;
  j["prototype_samples_per_cluster"] = c.prototype.samples_per_cluster;
  j["prototype_test_per_cluster"] = c.prototype.test_per_cluster;
  j["prototype_radius"] = c.prototype.radius;
  j["prototype_sigma"] = c.prototype.sigma;
  j["prototype_major_share"] = c.prototype.major_share;
  j["partition"] = c.partition == PartitionKind::kDirichlet ? "dirichlet" : "prototype";
  j["alpha"] = c.alpha;
  j["algorithm"] = algorithm_name(r.algorithm);
  j["sharing"] = sharing_name(r.sharing);
  j["num_users"] = r.num_users;
  j["active_users"] = r.active_users;
  j["local_steps"] = r.local_steps;
  j["batch_size"] = r.batch_size;
  j["synthetic_batch"] = r.synthetic_batch;
  j["synthetic_weight"] = r.synthetic_weight;
  j["learning_rate"] = r.learning_rate;
  j["generator_lr"] = r.generator_lr;
  j["generator_steps"] = r.generator_steps;
  j["generator_batch"] = r.generator_batch;
  j["generator_noise_dim"] = c.generator_noise_dim;
  j["generator_hidden_dim"] = c.generator_hidden_dim;
  j["diversity_weight"] = r.diversity_weight;
  j["weighted_ensemble"] = r.weighted_ensemble;
  j["distill_space"] = distill_space_name(r.distill_space);
  j["proximal_mu"] = r.proximal_mu;
  j["distill_gamma"] = r.distill_gamma;
  j["ensemble_lr"] = r.ensemble_lr;
  j["ensemble_steps"] = r.ensemble_steps;
  j["ensemble_batch"] = r.ensemble_batch;
  j["hidden_layers"] = c.hidden_layers;
  j["hidden_activation"] = c.hidden_activation;
  j["prior_mode"] = prior_mode_name(r.prior_mode);
  j["batch_sampling"] = batch_sampling_name(r.batch_sampling);
  j["rounds"] = r.rounds;
  j["seed"] = r.seed;
  j["eval_every"] = c.eval_every;
  j["checkpoint_every"] = c.checkpoint_every;
  j["record_wall_time"] = c.record_wall_time;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  const auto& table = setters();
  for (const auto& [key, value] : j.items()) {
    auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(c, value, key);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace fedkd
