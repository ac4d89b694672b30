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
#include <random>
#include <string>
#include <vector>

#include "fedkd/numerics/tensor.hpp"

namespace fedkd {

enum class ActivationKind { kIdentity, kReLU, kLeakyReLU };

struct Activation {
  ActivationKind kind = ActivationKind::kIdentity;
  double slope = 0.2;  // LeakyReLU only

  static Activation identity() { return {ActivationKind::kIdentity, 0.0}; }
  static Activation relu() { return {ActivationKind::kReLU, 0.0}; }
  static Activation leaky_relu(double slope = 0.2) { return {ActivationKind::kLeakyReLU, slope}; }

  friend bool operator==(const Activation&, const Activation&) = default;
};

std::string activation_name(const Activation& a);
/// Accepts "identity", "relu", "leaky_relu" (slope 0.2) and "leaky_relu:<slope>".
Activation parse_activation(const std::string& name);

/// Fully-connected layer y = act(x W + b), W stored [in x out].
struct DenseLayer {
  Tensor weights;
  Tensor bias;
  Activation activation;

  DenseLayer() = default;
  DenseLayer(std::size_t in_dim, std::size_t out_dim, Activation act);

  std::size_t in_dim() const { return weights.shape()[0]; }
  std::size_t out_dim() const { return weights.shape()[1]; }
  std::size_t parameter_count() const { return weights.size() + bias.size(); }

  /// Glorot-uniform weights in +-sqrt(6/(in+out)), zero bias.
  void init_glorot(std::mt19937_64& rng);
};

/// Forward cache for one dense layer; consumed by exactly one backward call.
class LayerTape {
 public:
  LayerTape() = default;
  LayerTape(Tensor input, Tensor pre_activation)
      : input_(std::move(input)), pre_(std::move(pre_activation)), valid_(true) {}

  const Tensor& input() const { return input_; }
  const Tensor& pre_activation() const { return pre_; }
  bool valid() const noexcept { return valid_; }
  void consume();

 private:
  Tensor input_;
  Tensor pre_;
  bool valid_ = false;
};

/// Ordered per-layer caches for a stack of dense layers.
using GradTape = std::vector<LayerTape>;

struct DenseOutput {
  Tensor output;
  LayerTape tape;
};

struct DenseGrads {
  Tensor input;    // empty when not requested
  Tensor weights;
  Tensor bias;
};

DenseOutput dense_forward(const DenseLayer& layer, const Tensor& input);

/// Backward pass for the layer given dL/d(output). Throws ContractError if the
/// tape has already been consumed.
DenseGrads dense_backward(const DenseLayer& layer, LayerTape& tape, const Tensor& upstream,
                          bool want_input_grad = true);

/// Inference-only forward without a tape.
Tensor dense_apply(const DenseLayer& layer, const Tensor& input);

}  // namespace fedkd
