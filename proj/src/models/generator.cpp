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

#include "fedkd/models/generator.hpp"

#include <cmath>
#include <string>

#include "fedkd/error.hpp"

namespace fedkd {

Generator::Generator(const GeneratorSpec& spec)
    : spec_(spec),
      hidden_(spec.noise_dim + static_cast<std::size_t>(spec.num_classes), spec.hidden_dim,
              Activation::leaky_relu(spec.hidden_slope)),
      output_(spec.hidden_dim, spec.output_dim, Activation::identity()) {
  if (spec.num_classes < 1) throw ContractError("generator: num_classes must be >= 1");
}

Generator Generator::create(const GeneratorSpec& spec, Rng& rng) {
  Generator g(spec);
  g.hidden_.init_glorot(rng);
  g.output_.init_glorot(rng);
  return g;
}

Tensor Generator::encode_input(std::span<const int> labels, const Tensor& eps) const {
  if (eps.rank() != 2 || eps.rows() != labels.size() || eps.cols() != spec_.noise_dim) {
    throw ContractError("generator: noise " + shape_string(eps.shape()) + " for " + std::to_string(labels.size()) +
                        " labels with noise_dim " + std::to_string(spec_.noise_dim));
  }
  Tensor onehot({labels.size(), static_cast<std::size_t>(spec_.num_classes)});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= spec_.num_classes) {
      throw ContractError("generator: label " + std::to_string(labels[i]) + " at index " + std::to_string(i) +
                          " out of range");
    }
    onehot.at(i, static_cast<std::size_t>(labels[i])) = 1.0;
  }
  return concat_cols(eps, onehot);
}

Generator::Pass Generator::forward(std::span<const int> labels, const Tensor& eps) const {
  Pass pass;
  auto h = dense_forward(hidden_, encode_input(labels, eps));
  auto out = dense_forward(output_, h.output);
  pass.z = std::move(out.output);
  pass.eps = eps;
  pass.hidden_tape = std::move(h.tape);
  pass.output_tape = std::move(out.tape);
  return pass;
}

Generator::Pass Generator::generate(std::span<const int> labels, Rng& rng) const {
  Tensor eps({labels.size(), spec_.noise_dim});
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : eps.values()) v = normal(rng);
  return forward(labels, eps);
}

ParamGrads Generator::backward(Pass& pass, const Tensor& dz) const {
  auto g_out = dense_backward(output_, pass.output_tape, dz, true);
  auto g_hid = dense_backward(hidden_, pass.hidden_tape, g_out.input, false);
  ParamGrads grads;
  grads.push_back(std::move(g_hid.weights));
  grads.push_back(std::move(g_hid.bias));
  grads.push_back(std::move(g_out.weights));
  grads.push_back(std::move(g_out.bias));
  return grads;
}

std::vector<Tensor*> Generator::parameters() {
  return {&hidden_.weights, &hidden_.bias, &output_.weights, &output_.bias};
}

std::vector<Tensor> Generator::tensors() const { return {hidden_.weights, hidden_.bias, output_.weights, output_.bias}; }

void Generator::set_tensors(const std::vector<Tensor>& t) {
  if (t.size() != 4) throw ContractError("generator: expected 4 tensors");
  auto params = parameters();
  for (std::size_t i = 0; i < 4; ++i) require_same_shape(*params[i], t[i], "generator set_tensors");
  for (std::size_t i = 0; i < 4; ++i) *params[i] = t[i];
}

LossResult diversity_loss(const Tensor& z, const Tensor& eps, std::span<const int> labels) {
  if (z.rank() != 2 || eps.rank() != 2 || z.rows() != eps.rows() || z.rows() != labels.size()) {
    throw ContractError("diversity_loss: z " + shape_string(z.shape()) + ", eps " + shape_string(eps.shape()) +
                        ", " + std::to_string(labels.size()) + " labels");
  }
  constexpr double kEps = 1e-8;
  const std::size_t b = z.rows();
  const std::size_t dz = z.cols();
  const std::size_t de = eps.cols();
  LossResult res{0.0, Tensor(z.shape())};

  std::size_t pairs = 0;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = i + 1; j < b; ++j) pairs += labels[i] == labels[j];
  }
  if (pairs == 0) return res;
  const double inv_pairs = 1.0 / static_cast<double>(pairs);

  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = i + 1; j < b; ++j) {
      if (labels[i] != labels[j]) continue;
      double noise = 0.0;
      for (std::size_t k = 0; k < de; ++k) noise += std::abs(eps.at(i, k) - eps.at(j, k));
      double dist = 0.0;
      for (std::size_t k = 0; k < dz; ++k) dist += std::abs(z.at(i, k) - z.at(j, k));
      const double denom = dist + kEps;
      res.value += noise / denom * inv_pairs;
      // d/dz_i of noise/denom = -noise/denom^2 * sign(z_i - z_j)
      const double coef = -noise / (denom * denom) * inv_pairs;
      for (std::size_t k = 0; k < dz; ++k) {
        const double d = z.at(i, k) - z.at(j, k);
        const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        res.grad.at(i, k) += coef * s;
        res.grad.at(j, k) -= coef * s;
      }
    }
  }
  return res;
}

}  // namespace fedkd
