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

#include "fedkd/numerics/optimizer.hpp"

#include <cmath>
#include <string>

#include "fedkd/error.hpp"

namespace fedkd {

void Optimizer::step(std::span<Tensor* const> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size()) {
    throw ContractError("optimizer_step: " + std::to_string(params.size()) + " parameters but " +
                        std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t i = 0; i < params.size(); ++i) require_same_shape(*params[i], grads[i], "optimizer_step");

  ++t_;
  if (config_.kind == OptimizerKind::kSGD) {
    for (std::size_t i = 0; i < params.size(); ++i) add_inplace(*params[i], grads[i], -config_.lr);
    return;
  }

  if (m_.empty()) {
    for (Tensor* p : params) {
      m_.emplace_back(p->shape());
      v_.emplace_back(p->shape());
    }
  } else if (m_.size() != params.size()) {
    throw ContractError("optimizer_step: parameter list changed size between steps");
  }

  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_shape(m_[i], grads[i], "optimizer_step");
    double* p = params[i]->data();
    double* m = m_[i].data();
    double* v = v_[i].data();
    const double* g = grads[i].data();
    for (std::size_t j = 0; j < grads[i].size(); ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
  }
}

void Optimizer::step(Tensor& param, const Tensor& grad) {
  Tensor* p = &param;
  step(std::span<Tensor* const>(&p, 1), std::span<const Tensor>(&grad, 1));
}

void Optimizer::reset() {
  t_ = 0;
  m_.clear();
  v_.clear();
}

}  // namespace fedkd
