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
#include <vector>

#include "fedkd/numerics/dense.hpp"
#include "fedkd/rng.hpp"

namespace fedkd {

/// Gradients aligned with Classifier::parameters() / Generator::parameters().
using ParamGrads = std::vector<Tensor>;

struct ClassifierSpec {
  std::size_t input_dim = 784;
  std::vector<std::size_t> hidden = {784, 32};  // last entry is the latent dim d
  int num_classes = 10;
  Activation hidden_activation = Activation::relu();
};

/// MLP split into a feature extractor f (every hidden layer) and a linear
/// predictor g over the latent z = f(x).
class Classifier {
 public:
  Classifier() = default;
  explicit Classifier(const ClassifierSpec& spec);

  /// Glorot init drawn from `rng` in layer order (features first).
  static Classifier create(const ClassifierSpec& spec, Rng& rng);

  const ClassifierSpec& spec() const noexcept { return spec_; }
  std::size_t latent_dim() const;
  int num_classes() const noexcept { return spec_.num_classes; }

  const std::vector<DenseLayer>& feature_layers() const noexcept { return features_; }
  const DenseLayer& predictor() const noexcept { return predictor_; }
  DenseLayer& predictor() noexcept { return predictor_; }

  /// Full forward pass with the caches needed for backward.
  struct Pass {
    Tensor z;
    Tensor logits;
    Tensor probs;
    GradTape feature_tape;
    LayerTape predictor_tape;
  };
  Pass forward(const Tensor& x) const;

  /// Predictor-only pass on latent inputs.
  struct LatentPass {
    Tensor logits;
    Tensor probs;
    LayerTape tape;
  };
  LatentPass forward_latent(const Tensor& z) const;

  /// dL/dtheta for every parameter given dL/dlogits. Consumes the pass.
  /// `dx_out`, when non-null, receives dL/dx.
  ParamGrads backward(Pass& pass, const Tensor& dlogits, Tensor* dx_out = nullptr) const;

  /// Gradients of the predictor-only path, {dW, db} for the predictor.
  /// The extractor is untouched by construction. `dz_out`, when non-null,
  /// receives dL/dz.
  ParamGrads backward_latent(LatentPass& pass, const Tensor& dlogits, Tensor* dz_out = nullptr) const;

  // Inference helpers (no tape).
  Tensor extract_features(const Tensor& x) const;
  Tensor predict_from_latent(const Tensor& z) const;  // logits
  Tensor logits(const Tensor& x) const;
  Tensor probs(const Tensor& x) const;

  /// Parameters in the fixed order [f0.W, f0.b, ..., p.W, p.b].
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::size_t feature_tensor_count() const noexcept { return 2 * features_.size(); }
  std::size_t parameter_count() const;
  std::size_t predictor_parameter_count() const { return predictor_.parameter_count(); }

  /// Copies of the predictor block / every block, in parameters() order.
  std::vector<Tensor> predictor_tensors() const;
  std::vector<Tensor> feature_tensors() const;
  std::vector<Tensor> tensors() const;
  void set_predictor_tensors(const std::vector<Tensor>& p);
  void set_feature_tensors(const std::vector<Tensor>& f);
  void set_tensors(const std::vector<Tensor>& all);

  ParamGrads zero_grads() const;

 private:
  ClassifierSpec spec_;
  std::vector<DenseLayer> features_;
  DenseLayer predictor_;
};

void add_grads(ParamGrads& dst, const ParamGrads& src, double scale = 1.0);

/// Adds predictor-block gradients {dW, db} onto the tail of a full ParamGrads.
void add_predictor_grads(ParamGrads& dst, const ParamGrads& predictor, double scale = 1.0);

}  // namespace fedkd
