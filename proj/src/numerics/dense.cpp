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

#include "fedkd/numerics/dense.hpp"

#include <cmath>

#include "fedkd/error.hpp"

namespace fedkd {
namespace {

void check_input(const DenseLayer& layer, const Tensor& input) {
  if (input.rank() != 2 || input.cols() != layer.in_dim()) {
    throw ContractError("dense_forward: input " + shape_string(input.shape()) +
                        " incompatible with weights " + shape_string(layer.weights.shape()));
  }
}

Tensor affine(const DenseLayer& layer, const Tensor& input) {
  Tensor pre = matmul(input, layer.weights);
  const std::size_t out = layer.out_dim();
  for (std::size_t r = 0; r < pre.rows(); ++r) {
    double* row = pre.data() + r * out;
    for (std::size_t c = 0; c < out; ++c) row[c] += layer.bias[c];
  }
  return pre;
}

void activate_inplace(const Activation& act, Tensor& t) {
  switch (act.kind) {
    case ActivationKind::kIdentity:
      return;
    case ActivationKind::kReLU:
      for (double& v : t.values()) v = v > 0.0 ? v : 0.0;
      return;
    case ActivationKind::kLeakyReLU:
      for (double& v : t.values()) v = v > 0.0 ? v : act.slope * v;
      return;
  }
}

}  // namespace

std::string activation_name(const Activation& a) {
  switch (a.kind) {
    case ActivationKind::kIdentity:
      return "identity";
    case ActivationKind::kReLU:
      return "relu";
    case ActivationKind::kLeakyReLU:
      return a.slope == 0.2 ? "leaky_relu" : "leaky_relu:" + std::to_string(a.slope);
  }
  return "identity";
}

Activation parse_activation(const std::string& name) {
  if (name == "identity" || name == "linear") return Activation::identity();
  if (name == "relu") return Activation::relu();
  if (name == "leaky_relu") return Activation::leaky_relu();
  const std::string prefix = "leaky_relu:";
  if (name.rfind(prefix, 0) == 0) return Activation::leaky_relu(std::stod(name.substr(prefix.size())));
  throw ContractError("unknown activation '" + name + "'");
}

DenseLayer::DenseLayer(std::size_t in_dim, std::size_t out_dim, Activation act)
    : weights({in_dim, out_dim}), bias({out_dim}), activation(act) {}

void DenseLayer::init_glorot(std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in_dim() + out_dim()));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& w : weights.values()) w = dist(rng);
  bias.fill(0.0);
}

void LayerTape::consume() {
  if (!valid_) throw ContractError("dense_backward: tape already consumed or never recorded");
  valid_ = false;
}

DenseOutput dense_forward(const DenseLayer& layer, const Tensor& input) {
  check_input(layer, input);
  Tensor pre = affine(layer, input);
  Tensor out = pre;
  activate_inplace(layer.activation, out);
  return {std::move(out), LayerTape(input, std::move(pre))};
}

Tensor dense_apply(const DenseLayer& layer, const Tensor& input) {
  check_input(layer, input);
  Tensor out = affine(layer, input);
  activate_inplace(layer.activation, out);
  return out;
}

DenseGrads dense_backward(const DenseLayer& layer, LayerTape& tape, const Tensor& upstream,
                          bool want_input_grad) {
  tape.consume();
  const Tensor& pre = tape.pre_activation();
  if (upstream.shape() != pre.shape()) {
    throw ContractError("dense_backward: upstream " + shape_string(upstream.shape()) +
                        " does not match output " + shape_string(pre.shape()));
  }

  // dL/d(pre) = upstream * act'(pre)
  Tensor delta = upstream;
  switch (layer.activation.kind) {
    case ActivationKind::kIdentity:
      break;
    case ActivationKind::kReLU:
      for (std::size_t i = 0; i < delta.size(); ++i) {
        if (!(pre[i] > 0.0)) delta[i] = 0.0;
      }
      break;
    case ActivationKind::kLeakyReLU:
      for (std::size_t i = 0; i < delta.size(); ++i) {
        if (!(pre[i] > 0.0)) delta[i] *= layer.activation.slope;
      }
      break;
  }

  DenseGrads g;
  g.weights = matmul_tn(tape.input(), delta);
  g.bias = Tensor({layer.out_dim()});
  const std::size_t out = layer.out_dim();
  for (std::size_t r = 0; r < delta.rows(); ++r) {
    const double* row = delta.data() + r * out;
    for (std::size_t c = 0; c < out; ++c) g.bias[c] += row[c];
  }
  if (want_input_grad) g.input = matmul_nt(delta, layer.weights);
  return g;
}

}  // namespace fedkd
