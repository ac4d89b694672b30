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

#include "fedkd/models/classifier.hpp"

#include <string>

#include "fedkd/error.hpp"
#include "fedkd/numerics/losses.hpp"

namespace fedkd {

Classifier::Classifier(const ClassifierSpec& spec) : spec_(spec) {
  if (spec.hidden.empty()) throw ContractError("classifier: at least one hidden layer is required");
  if (spec.num_classes < 1) throw ContractError("classifier: num_classes must be >= 1");
  std::size_t in = spec.input_dim;
  for (std::size_t h : spec.hidden) {
    features_.emplace_back(in, h, spec.hidden_activation);
    in = h;
  }
  predictor_ = DenseLayer(in, static_cast<std::size_t>(spec.num_classes), Activation::identity());
}

Classifier Classifier::create(const ClassifierSpec& spec, Rng& rng) {
  Classifier c(spec);
  for (auto& layer : c.features_) layer.init_glorot(rng);
  c.predictor_.init_glorot(rng);
  return c;
}

std::size_t Classifier::latent_dim() const { return predictor_.in_dim(); }

Classifier::Pass Classifier::forward(const Tensor& x) const {
  if (x.rank() != 2 || x.cols() != spec_.input_dim) {
    throw ContractError("classify: input " + shape_string(x.shape()) + " but classifier expects " +
                        std::to_string(spec_.input_dim) + " features");
  }
  Pass pass;
  pass.feature_tape.reserve(features_.size());
  Tensor h = x;
  for (const auto& layer : features_) {
    auto out = dense_forward(layer, h);
    pass.feature_tape.push_back(std::move(out.tape));
    h = std::move(out.output);
  }
  pass.z = std::move(h);
  auto head = dense_forward(predictor_, pass.z);
  pass.logits = std::move(head.output);
  pass.predictor_tape = std::move(head.tape);
  pass.probs = softmax(pass.logits);
  return pass;
}

Classifier::LatentPass Classifier::forward_latent(const Tensor& z) const {
  if (z.rank() != 2 || z.cols() != latent_dim()) {
    throw ContractError("predict_from_latent: latent " + shape_string(z.shape()) + " but predictor expects " +
                        std::to_string(latent_dim()) + " features");
  }
  auto head = dense_forward(predictor_, z);
  LatentPass pass;
  pass.probs = softmax(head.output);
  pass.logits = std::move(head.output);
  pass.tape = std::move(head.tape);
  return pass;
}

ParamGrads Classifier::backward(Pass& pass, const Tensor& dlogits, Tensor* dx_out) const {
  ParamGrads grads(2 * features_.size() + 2);
  auto head = dense_backward(predictor_, pass.predictor_tape, dlogits, !features_.empty() || dx_out);
  grads[grads.size() - 2] = std::move(head.weights);
  grads[grads.size() - 1] = std::move(head.bias);
  Tensor upstream = std::move(head.input);
  for (std::size_t i = features_.size(); i-- > 0;) {
    // The first layer's input gradient is only needed for input-space distillation.
    auto g = dense_backward(features_[i], pass.feature_tape[i], upstream, i > 0 || dx_out);
    grads[2 * i] = std::move(g.weights);
    grads[2 * i + 1] = std::move(g.bias);
    upstream = std::move(g.input);
  }
  if (dx_out) *dx_out = std::move(upstream);
  return grads;
}

ParamGrads Classifier::backward_latent(LatentPass& pass, const Tensor& dlogits, Tensor* dz_out) const {
  auto head = dense_backward(predictor_, pass.tape, dlogits, dz_out != nullptr);
  if (dz_out) *dz_out = std::move(head.input);
  ParamGrads grads;
  grads.push_back(std::move(head.weights));
  grads.push_back(std::move(head.bias));
  return grads;
}

Tensor Classifier::extract_features(const Tensor& x) const {
  if (x.rank() != 2 || x.cols() != spec_.input_dim) {
    throw ContractError("extract_features: input " + shape_string(x.shape()) + " but classifier expects " +
                        std::to_string(spec_.input_dim) + " features");
  }
  Tensor h = x;
  for (const auto& layer : features_) h = dense_apply(layer, h);
  return h;
}

Tensor Classifier::predict_from_latent(const Tensor& z) const {
  if (z.rank() != 2 || z.cols() != latent_dim()) {
    throw ContractError("predict_from_latent: latent " + shape_string(z.shape()) + " but predictor expects " +
                        std::to_string(latent_dim()) + " features");
  }
  return dense_apply(predictor_, z);
}

Tensor Classifier::logits(const Tensor& x) const { return predict_from_latent(extract_features(x)); }

Tensor Classifier::probs(const Tensor& x) const { return softmax(logits(x)); }

std::vector<Tensor*> Classifier::parameters() {
  std::vector<Tensor*> out;
  out.reserve(2 * features_.size() + 2);
  for (auto& layer : features_) {
    out.push_back(&layer.weights);
    out.push_back(&layer.bias);
  }
  out.push_back(&predictor_.weights);
  out.push_back(&predictor_.bias);
  return out;
}

std::vector<const Tensor*> Classifier::parameters() const {
  std::vector<const Tensor*> out;
  out.reserve(2 * features_.size() + 2);
  for (const auto& layer : features_) {
    out.push_back(&layer.weights);
    out.push_back(&layer.bias);
  }
  out.push_back(&predictor_.weights);
  out.push_back(&predictor_.bias);
  return out;
}

std::size_t Classifier::parameter_count() const {
  std::size_t n = predictor_.parameter_count();
  for (const auto& layer : features_) n += layer.parameter_count();
  return n;
}

std::vector<Tensor> Classifier::predictor_tensors() const { return {predictor_.weights, predictor_.bias}; }

std::vector<Tensor> Classifier::feature_tensors() const {
  std::vector<Tensor> out;
  for (const auto& layer : features_) {
    out.push_back(layer.weights);
    out.push_back(layer.bias);
  }
  return out;
}

std::vector<Tensor> Classifier::tensors() const {
  auto out = feature_tensors();
  out.push_back(predictor_.weights);
  out.push_back(predictor_.bias);
  return out;
}

void Classifier::set_predictor_tensors(const std::vector<Tensor>& p) {
  if (p.size() != 2) throw ContractError("predictor block must hold 2 tensors");
  require_same_shape(predictor_.weights, p[0], "set_predictor_tensors");
  require_same_shape(predictor_.bias, p[1], "set_predictor_tensors");
  predictor_.weights = p[0];
  predictor_.bias = p[1];
}

void Classifier::set_feature_tensors(const std::vector<Tensor>& f) {
  if (f.size() != 2 * features_.size()) throw ContractError("feature block tensor count mismatch");
  for (std::size_t i = 0; i < features_.size(); ++i) {
    require_same_shape(features_[i].weights, f[2 * i], "set_feature_tensors");
    require_same_shape(features_[i].bias, f[2 * i + 1], "set_feature_tensors");
    features_[i].weights = f[2 * i];
    features_[i].bias = f[2 * i + 1];
  }
}

void Classifier::set_tensors(const std::vector<Tensor>& all) {
  if (all.size() != 2 * features_.size() + 2) throw ContractError("classifier tensor count mismatch");
  set_feature_tensors(std::vector<Tensor>(all.begin(), all.end() - 2));
  set_predictor_tensors(std::vector<Tensor>(all.end() - 2, all.end()));
}

ParamGrads Classifier::zero_grads() const {
  ParamGrads g;
  for (const Tensor* p : parameters()) g.emplace_back(p->shape());
  return g;
}

void add_grads(ParamGrads& dst, const ParamGrads& src, double scale) {
  if (dst.size() != src.size()) throw ContractError("add_grads: tensor count mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) add_inplace(dst[i], src[i], scale);
}

void add_predictor_grads(ParamGrads& dst, const ParamGrads& predictor, double scale) {
  if (dst.size() < 2 || predictor.size() != 2) throw ContractError("add_predictor_grads: expected a predictor block");
  add_inplace(dst[dst.size() - 2], predictor[0], scale);
  add_inplace(dst[dst.size() - 1], predictor[1], scale);
}

}  // namespace fedkd
