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
#include <span>
#include <vector>

#include "fedkd/models/classifier.hpp"
#include "fedkd/numerics/losses.hpp"

namespace fedkd {

struct GeneratorSpec {
  std::size_t noise_dim = 32;
  std::size_t hidden_dim = 256;
  std::size_t output_dim = 32;
  int num_classes = 10;
  double hidden_slope = 0.2;
};

/// Conditional generator z = G(eps, y): concat(eps, onehot(y)) -> LeakyReLU
/// hidden layer -> linear output in the classifier's latent space.
class Generator {
 public:
  Generator() = default;
  explicit Generator(const GeneratorSpec& spec);
  static Generator create(const GeneratorSpec& spec, Rng& rng);

  const GeneratorSpec& spec() const noexcept { return spec_; }

  struct Pass {
    Tensor z;
    Tensor eps;
    LayerTape hidden_tape;
    LayerTape output_tape;
  };

  /// Draws eps ~ N(0, I) from `rng`, one row per label.
  Pass generate(std::span<const int> labels, Rng& rng) const;
  /// Same network on caller-supplied noise.
  Pass forward(std::span<const int> labels, const Tensor& eps) const;

  /// {dW1, db1, dW2, db2} given dL/dz. Consumes the pass.
  ParamGrads backward(Pass& pass, const Tensor& dz) const;

  std::vector<Tensor*> parameters();
  std::vector<Tensor> tensors() const;
  void set_tensors(const std::vector<Tensor>& t);
  std::size_t parameter_count() const { return hidden_.parameter_count() + output_.parameter_count(); }

 private:
  Tensor encode_input(std::span<const int> labels, const Tensor& eps) const;

  GeneratorSpec spec_;
  DenseLayer hidden_;
  DenseLayer output_;
};

/// Mode-seeking penalty over same-label pairs (i<j):
///   mean ||eps_i - eps_j||_1 / (||z_i - z_j||_1 + 1e-8).
/// Zero when no pair shares a label. Gradient is w.r.t. z.
LossResult diversity_loss(const Tensor& z, const Tensor& eps, std::span<const int> labels);

}  // namespace fedkd
