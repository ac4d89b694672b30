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


#include "fedkd/protocols/config.hpp"

#include <array>
#include <utility>

#include "fedkd/error.hpp"

namespace fedkd {
namespace {

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "?";
}

template <typename E, std::size_t N>
E parse_of(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s, const char* what) {
  std::string choices;
  for (const auto& [e, name] : table) {
    if (name == s) return e;
    choices += choices.empty() ? "" : "|";
    choices += name;
  }
  throw ConfigError(std::string(what) + ": unknown value '" + std::string(s) + "' (expected " + choices + ")");
}

constexpr std::array<std::pair<Algorithm, std::string_view>, 7> kAlgorithms{{
    {Algorithm::kFedAvg, "fedavg"},
    {Algorithm::kFedProx, "fedprox"},
    {Algorithm::kFedEnsemble, "fedensemble"},
    {Algorithm::kFedDistill, "feddistill"},
    {Algorithm::kFedDistillPlus, "feddistill+"},
    {Algorithm::kFedDFusion, "feddfusion"},
    {Algorithm::kFedGen, "fedgen"},
}};
constexpr std::array<std::pair<SharingMode, std::string_view>, 2> kSharing{{
    {SharingMode::kFull, "full"},
    {SharingMode::kPredictorOnly, "predictor_only"},
}};
constexpr std::array<std::pair<PriorMode, std::string_view>, 2> kPrior{{
    {PriorMode::kRound, "round"},
    {PriorMode::kCumulative, "cumulative"},
}};
constexpr std::array<std::pair<BatchSampling, std::string_view>, 2> kSampling{{
    {BatchSampling::kReplacement, "replacement"},
    {BatchSampling::kEpoch, "epoch"},
}};
constexpr std::array<std::pair<DistillSpace, std::string_view>, 2> kSpace{{
    {DistillSpace::kLatent, "latent"},
    {DistillSpace::kInput, "input"},
}};

}  // namespace

std::string_view algorithm_name(Algorithm a) { return name_of(kAlgorithms, a); }
Algorithm parse_algorithm(std::string_view s) { return parse_of(kAlgorithms, s, "algorithm"); }
std::string_view sharing_name(SharingMode m) { return name_of(kSharing, m); }
SharingMode parse_sharing(std::string_view s) { return parse_of(kSharing, s, "sharing"); }
std::string_view prior_mode_name(PriorMode m) { return name_of(kPrior, m); }
PriorMode parse_prior_mode(std::string_view s) { return parse_of(kPrior, s, "prior_mode"); }
std::string_view batch_sampling_name(BatchSampling b) { return name_of(kSampling, b); }
BatchSampling parse_batch_sampling(std::string_view s) { return parse_of(kSampling, s, "batch_sampling"); }
std::string_view distill_space_name(DistillSpace d) { return name_of(kSpace, d); }
DistillSpace parse_distill_space(std::string_view s) { return parse_of(kSpace, s, "distill_space"); }

bool supports_partial(Algorithm a) {
  return a == Algorithm::kFedAvg || a == Algorithm::kFedDistillPlus || a == Algorithm::kFedGen;
}

void RoundConfig::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(num_users >= 1, "num_users must be >= 1");
  require(active_users >= 1 && active_users <= num_users, "active_users must lie in [1, num_users]");
  require(local_steps >= 1, "local_steps must be >= 1");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(learning_rate > 0.0, "learning_rate must be > 0");
  require(generator_lr > 0.0, "generator_lr must be > 0");
  require(ensemble_lr > 0.0, "ensemble_lr must be > 0");
  require(generator_batch >= 1, "generator_batch must be >= 1");
  require(ensemble_batch >= 1, "ensemble_batch must be >= 1");
  require(proximal_mu >= 0.0, "proximal_mu must be >= 0");
  require(synthetic_weight >= 0.0, "synthetic_weight must be >= 0");
  require(distill_gamma >= 0.0, "distill_gamma must be >= 0");
  require(diversity_weight >= 0.0, "diversity_weight must be >= 0");
  require(sharing == SharingMode::kFull || supports_partial(algorithm),
          "sharing=predictor_only is only defined for fedavg, feddistill+ and fedgen");
  require(sharing == SharingMode::kFull || distill_space == DistillSpace::kLatent,
          "distill_space=input needs whole client models and cannot be combined with predictor_only sharing");
}

}  // namespace fedkd
