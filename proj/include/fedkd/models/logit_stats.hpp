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

#include <cstdint>
#include <span>
#include <vector>

#include "fedkd/numerics/tensor.hpp"

namespace fedkd {

/// Label-wise running means of logit vectors.
class LogitStats {
 public:
  LogitStats() = default;
  explicit LogitStats(int num_classes);

  int num_classes() const noexcept { return classes_; }
  void update(const Tensor& logits, std::span<const int> labels);
  /// Count-weighted merge.
  void merge(const LogitStats& other);

  bool has_class(int c) const { return counts_[static_cast<std::size_t>(c)] > 0; }
  std::int64_t count(int c) const { return counts_[static_cast<std::size_t>(c)]; }
  /// Mean logit vector for class c (zeros if unseen).
  std::vector<double> mean(int c) const;
  /// [C x C] matrix of means.
  Tensor means() const;
  bool empty() const;

  /// Serialized form: means followed by counts (as doubles).
  std::vector<Tensor> tensors() const;

 private:
  int classes_ = 0;
  Tensor sums_;  // [C x C]
  std::vector<std::int64_t> counts_;
};

}  // namespace fedkd
