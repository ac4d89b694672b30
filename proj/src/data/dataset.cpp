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

#include "fedkd/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedkd/error.hpp"

namespace fedkd {

void Dataset::validate() const {
  if (labels.empty()) throw ContractError("dataset: empty");
  if (features.rank() != 2 || features.rows() != labels.size()) {
    throw ContractError("dataset: features " + shape_string(features.shape()) + " vs " +
                        std::to_string(labels.size()) + " labels");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw ContractError("dataset: label " + std::to_string(labels[i]) + " at index " + std::to_string(i) +
                          " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.features = gather_rows(features, indices);
  out.labels.reserve(indices.size());
  for (auto i : indices) out.labels.push_back(labels[i]);
  out.num_classes = num_classes;
  return out;
}

std::size_t Partition::total() const noexcept {
  std::size_t n = 0;
  for (const auto& c : clients) n += c.size();
  return n;
}

void check_partition(const Partition& partition, std::size_t n) {
  std::vector<int> owner(n, -1);
  for (std::size_t k = 0; k < partition.clients.size(); ++k) {
    for (auto idx : partition.clients[k]) {
      if (idx >= n) {
        throw ContractError("partition: index " + std::to_string(idx) + " out of range " + std::to_string(n));
      }
      if (owner[idx] != -1) {
        throw ContractError("partition: index " + std::to_string(idx) + " assigned to clients " +
                            std::to_string(owner[idx]) + " and " + std::to_string(k));
      }
      owner[idx] = static_cast<int>(k);
    }
  }
}

void LabelCounter::add(std::span<const int> labels) {
  for (int y : labels) {
    if (y < 0 || y >= num_classes()) {
      throw ContractError("label counter: label " + std::to_string(y) + " outside [0, " +
                          std::to_string(num_classes()) + ")");
    }
    ++counts_[static_cast<std::size_t>(y)];
  }
}

void LabelCounter::add(const LabelCounter& other) {
  if (other.num_classes() != num_classes()) throw ContractError("label counter: class count mismatch");
  for (std::size_t c = 0; c < counts_.size(); ++c) counts_[c] += other.counts_[c];
}

void LabelCounter::reset() { std::fill(counts_.begin(), counts_.end(), 0); }

std::int64_t LabelCounter::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

LabelCounter count_labels(std::span<const int> labels, int num_classes) {
  LabelCounter counter(num_classes);
  counter.add(labels);
  return counter;
}

LabelPrior LabelPrior::uniform(int num_classes) {
  return {std::vector<double>(static_cast<std::size_t>(num_classes), 1.0 / num_classes)};
}

LabelPrior aggregate_prior(std::span<const LabelCounter> counters) {
  if (counters.empty()) throw ContractError("aggregate_prior: no counters");
  const int classes = counters.front().num_classes();
  std::vector<std::int64_t> sum(static_cast<std::size_t>(classes), 0);
  std::int64_t total = 0;
  for (const auto& c : counters) {
    if (c.num_classes() != classes) throw ContractError("aggregate_prior: class count mismatch");
    for (int y = 0; y < classes; ++y) {
      sum[static_cast<std::size_t>(y)] += c[y];
      total += c[y];
    }
  }
  if (total <= 0) throw ContractError("aggregate_prior: all label counts are zero");
  LabelPrior prior;
  prior.probs.resize(sum.size());
  for (std::size_t y = 0; y < sum.size(); ++y) {
    prior.probs[y] = static_cast<double>(sum[y]) / static_cast<double>(total);
  }
  return prior;
}

std::vector<double> label_marginal(std::span<const int> labels, int num_classes) {
  std::vector<double> m(static_cast<std::size_t>(num_classes), 0.0);
  if (labels.empty()) return m;
  for (int y : labels) m[static_cast<std::size_t>(y)] += 1.0;
  for (double& v : m) v /= static_cast<double>(labels.size());
  return m;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ContractError("total_variation: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc;
}

double mean_label_skew(const Dataset& data, const Partition& partition) {
  const auto global = label_marginal(data.labels, data.num_classes);
  double acc = 0.0;
  std::size_t used = 0;
  for (const auto& client : partition.clients) {
    if (client.empty()) continue;
    std::vector<int> ys;
    ys.reserve(client.size());
    for (auto i : client) ys.push_back(data.labels[i]);
    acc += total_variation(label_marginal(ys, data.num_classes), global);
    ++used;
  }
  return used ? acc / static_cast<double>(used) : 0.0;
}

}  // namespace fedkd
