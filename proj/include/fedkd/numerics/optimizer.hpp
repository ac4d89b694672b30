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

enum class OptimizerKind { kSGD, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kSGD;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static OptimizerConfig sgd(double lr) { return {OptimizerKind::kSGD, lr}; }
  static OptimizerConfig adam(double lr) { return {OptimizerKind::kAdam, lr}; }
};

/// SGD or Adam over an ordered list of parameter tensors. Moment buffers are
/// allocated lazily on the first step and keyed by position in the list, so
/// callers must pass parameters in a stable order.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config = {}) : config_(config) {}

  const OptimizerConfig& config() const noexcept { return config_; }
  std::int64_t steps() const noexcept { return t_; }

  void step(std::span<Tensor* const> params, std::span<const Tensor> grads);
  /// Single-tensor convenience overload.
  void step(Tensor& param, const Tensor& grad);

  void reset();

 private:
  OptimizerConfig config_;
  std::int64_t t_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

}  // namespace fedkd
