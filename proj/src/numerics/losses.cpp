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

#include "fedkd/numerics/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedkd/error.hpp"

namespace fedkd {
namespace {

void check_labels(const Tensor& m, std::span<const int> labels, const char* what) {
  if (m.rank() != 2 || labels.size() != m.rows()) {
    throw ContractError(std::string(what) + ": " + std::to_string(labels.size()) + " labels for " +
                        shape_string(m.shape()));
  }
  const int classes = static_cast<int>(m.cols());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) {
      throw ContractError(std::string(what) + ": label " + std::to_string(labels[i]) + " at index " +
                          std::to_string(i) + " outside [0, " + std::to_string(classes) + ")");
    }
  }
}

}  // namespace

Tensor softmax(const Tensor& logits) {
  Tensor out(logits.shape());
  const std::size_t c = logits.cols();
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto in = logits.row(r);
    auto o = out.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      o[j] = std::exp(in[j] - mx);
      sum += o[j];
    }
    for (std::size_t j = 0; j < c; ++j) o[j] /= sum;
  }
  return out;
}

Tensor log_softmax(const Tensor& logits) {
  Tensor out(logits.shape());
  const std::size_t c = logits.cols();
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto in = logits.row(r);
    auto o = out.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) sum += std::exp(in[j] - mx);
    const double lse = mx + std::log(sum);
    for (std::size_t j = 0; j < c; ++j) o[j] = in[j] - lse;
  }
  return out;
}

LossResult cross_entropy(const Tensor& probs, std::span<const int> labels) {
  check_labels(probs, labels, "cross_entropy");
  const std::size_t b = probs.rows();
  LossResult res{0.0, probs};
  if (b == 0) return res;
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t i = 0; i < b; ++i) {
    const double p = probs.at(i, static_cast<std::size_t>(labels[i]));
    if (!(p > 0.0)) throw NumericError("cross_entropy: zero probability for the true label at row " + std::to_string(i));
    res.value -= std::log(p);
    res.grad.at(i, static_cast<std::size_t>(labels[i])) -= 1.0;
  }
  res.value *= inv_b;
  scale_inplace(res.grad, inv_b);
  return res;
}

LossResult cross_entropy_with_logits(const Tensor& logits, std::span<const int> labels, Tensor* probs_out) {
  check_labels(logits, labels, "cross_entropy");
  const std::size_t b = logits.rows();
  Tensor logp = log_softmax(logits);
  LossResult res{0.0, Tensor(logits.shape())};
  for (std::size_t i = 0; i < logp.size(); ++i) res.grad[i] = std::exp(logp[i]);
  if (probs_out) *probs_out = res.grad;
  if (b == 0) return res;
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t i = 0; i < b; ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    res.value -= logp.at(i, y);
    res.grad.at(i, y) -= 1.0;
  }
  res.value *= inv_b;
  scale_inplace(res.grad, inv_b);
  if (!std::isfinite(res.value)) throw NumericError("cross_entropy: non-finite loss");
  return res;
}

LossResult kl_divergence(const Tensor& p, const Tensor& q) {
  require_same_shape(p, q, "kl_divergence");
  const std::size_t b = p.rows();
  const std::size_t c = p.cols();
  LossResult res{0.0, Tensor(p.shape())};
  if (b == 0) return res;
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t i = 0; i < b; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double pj = p.at(i, j);
      const double qj = q.at(i, j);
      if (pj > 0.0) {
        if (!(qj > 0.0)) {
          throw NumericError("kl_divergence: q[" + std::to_string(i) + "," + std::to_string(j) +
                             "] = 0 where p > 0 (infinite divergence)");
        }
        row += pj * std::log(pj / qj);
      }
      res.grad.at(i, j) = (qj - pj) * inv_b;
    }
    res.value += row;
  }
  res.value *= inv_b;
  return res;
}

int argmax_row(std::span<const double> row) {
  int best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[static_cast<std::size_t>(best)]) best = static_cast<int>(j);
  }
  return best;
}

}  // namespace fedkd
