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
#include <span>
#include <vector>

#include "fedkd/numerics/tensor.hpp"

namespace fedkd {

/// Labelled examples, features [N x p]. Immutable once built.
struct Dataset {
  Tensor features;
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t feature_dim() const { return features.cols(); }

  /// Throws ContractError unless N >= 1, shapes agree and labels lie in [0, C).
  void validate() const;

  /// Copy of the rows named by `indices`, in order.
  Dataset subset(std::span<const std::size_t> indices) const;
};

/// Per-client index lists into a parent dataset.
struct Partition {
  std::vector<std::vector<std::size_t>> clients;

  std::size_t num_clients() const noexcept { return clients.size(); }
  std::size_t total() const noexcept;
};

/// Throws ContractError if lists overlap or reference indices >= n.
void check_partition(const Partition& partition, std::size_t n);

/// Class histogram c_k.
class LabelCounter {
 public:
  LabelCounter() = default;
  explicit LabelCounter(int num_classes) : counts_(static_cast<std::size_t>(num_classes), 0) {}

  void add(std::span<const int> labels);
  void add(const LabelCounter& other);
  void reset();

  int num_classes() const noexcept { return static_cast<int>(counts_.size()); }
  std::int64_t operator[](int c) const { return counts_[static_cast<std::size_t>(c)]; }
  const std::vector<std::int64_t>& counts() const noexcept { return counts_; }
  std::int64_t total() const noexcept;

 private:
  std::vector<std::int64_t> counts_;
};

LabelCounter count_labels(std::span<const int> labels, int num_classes);

/// Normalized label distribution p(y).
struct LabelPrior {
  std::vector<double> probs;

  static LabelPrior uniform(int num_classes);
  int num_classes() const noexcept { return static_cast<int>(probs.size()); }
};

/// probs[c] = sum_k counts_k[c] / sum_{k,c} counts_k[c]. Throws ContractError
/// on an empty list or when every count is zero.
LabelPrior aggregate_prior(std::span<const LabelCounter> counters);

/// Empirical label distribution of a subset of a dataset.
std::vector<double> label_marginal(std::span<const int> labels, int num_classes);
double total_variation(std::span<const double> p, std::span<const double> q);

/// Mean TV distance between each client's label marginal and the pooled marginal.
double mean_label_skew(const Dataset& data, const Partition& partition);

}  // namespace fedkd
