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

#include <span>

#include "fedkd/numerics/tensor.hpp"

namespace fedkd {

/// Scalar loss together with its gradient with respect to the logits that
/// produced the probabilities. Batch reduction is always the mean.
struct LossResult {
  double value = 0.0;
  Tensor grad;
};

/// Row-wise softmax with max subtraction.
Tensor softmax(const Tensor& logits);
Tensor log_softmax(const Tensor& logits);

/// Mean negative log-likelihood of `labels` under row-normalized `probs`.
/// The gradient is taken w.r.t. the logits behind `probs`: (probs - onehot)/B.
LossResult cross_entropy(const Tensor& probs, std::span<const int> labels);

/// Same loss evaluated through log-softmax for stability. `probs_out`, when
/// non-null, receives softmax(logits).
LossResult cross_entropy_with_logits(const Tensor& logits, std::span<const int> labels,
                                     Tensor* probs_out = nullptr);

/// Mean over rows of sum_c p log(p/q), 0 log 0 := 0. The gradient is taken
/// w.r.t. the logits of q (p held fixed): (q - p)/B.
LossResult kl_divergence(const Tensor& p, const Tensor& q);

/// Index of the row maximum; ties resolve to the lowest index.
int argmax_row(std::span<const double> row);

}  // namespace fedkd
