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


#include "fedkd/harness/evaluate.hpp"

#include <algorithm>
#include <numeric>

#include "fedkd/error.hpp"
#include "fedkd/numerics/losses.hpp"
#include "fedkd/protocols/server.hpp"

namespace fedkd {
namespace {

constexpr std::size_t kChunk = 1000;

template <typename Scorer>
double chunked_accuracy(const Dataset& test, Scorer&& scores) {
  if (test.size() == 0) throw ContractError("evaluate: empty test set");
  std::size_t correct = 0;
  for (std::size_t start = 0; start < test.size(); start += kChunk) {
    const std::size_t end = std::min(test.size(), start + kChunk);
    std::vector<std::size_t> idx(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const Tensor s = scores(gather_rows(test.features, idx));
    for (std::size_t i = 0; i < idx.size(); ++i) correct += argmax_row(s.row(i)) == test.labels[start + i];
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace

double accuracy(const Tensor& scores, std::span<const int> labels) {
  if (scores.rank() != 2 || scores.rows() != labels.size() || labels.empty()) {
    throw ContractError("accuracy: scores " + shape_string(scores.shape()) + " for " + std::to_string(labels.size()) +
                        " labels");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += argmax_row(scores.row(i)) == labels[i];
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double evaluate(const Classifier& model, const Dataset& test) {
  return chunked_accuracy(test, [&](const Tensor& x) { return model.probs(x); });
}

double evaluate_ensemble(std::span<const Classifier* const> models, const Dataset& test) {
  return chunked_accuracy(test, [&](const Tensor& x) { return ensemble_predict(models, x); });
}

double evaluate_federation(const Federation& fed, const Dataset& test) {
  const auto& cfg = fed.config;
  if (cfg.algorithm == Algorithm::kFedEnsemble && !fed.server.ensemble.empty()) {
    std::vector<const Classifier*> models;
    for (const auto& [id, model] : fed.server.ensemble) models.push_back(&model);
    return evaluate_ensemble(models, test);
  }
  if (cfg.sharing == SharingMode::kPredictorOnly || cfg.algorithm == Algorithm::kFedDistill) {
    double sum = 0.0;
    for (std::size_t k = 0; k < fed.clients.size(); ++k) sum += evaluate(client_view(fed, k), test);
    return sum / static_cast<double>(fed.clients.size());
  }
  return evaluate(fed.server.model, test);
}

}  // namespace fedkd
