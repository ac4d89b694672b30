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

#include "fedkd/models/logit_stats.hpp"

#include <algorithm>
#include <string>

#include "fedkd/error.hpp"

namespace fedkd {

LogitStats::LogitStats(int num_classes)
    : classes_(num_classes),
      sums_({static_cast<std::size_t>(num_classes), static_cast<std::size_t>(num_classes)}),
      counts_(static_cast<std::size_t>(num_classes), 0) {}

void LogitStats::update(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2 || logits.rows() != labels.size() || logits.cols() != static_cast<std::size_t>(classes_)) {
    throw ContractError("logit stats: logits " + shape_string(logits.shape()) + " for " +
                        std::to_string(labels.size()) + " labels, " + std::to_string(classes_) + " classes");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    if (labels[i] < 0 || labels[i] >= classes_) throw ContractError("logit stats: label out of range");
    auto row = sums_.row(y);
    auto src = logits.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += src[c];
    ++counts_[y];
  }
}

void LogitStats::merge(const LogitStats& other) {
  if (other.classes_ != classes_) throw ContractError("logit stats: class count mismatch");
  add_inplace(sums_, other.sums_);
  for (std::size_t c = 0; c < counts_.size(); ++c) counts_[c] += other.counts_[c];
}

std::vector<double> LogitStats::mean(int c) const {
  std::vector<double> out(static_cast<std::size_t>(classes_), 0.0);
  const auto n = counts_[static_cast<std::size_t>(c)];
  if (n == 0) return out;
  auto row = sums_.row(static_cast<std::size_t>(c));
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = row[j] / static_cast<double>(n);
  return out;
}

Tensor LogitStats::means() const {
  Tensor m(sums_.shape());
  for (int c = 0; c < classes_; ++c) {
    auto row = mean(c);
    std::copy(row.begin(), row.end(), m.row(static_cast<std::size_t>(c)).begin());
  }
  return m;
}

bool LogitStats::empty() const {
  for (auto n : counts_) {
    if (n) return false;
  }
  return true;
}

std::vector<Tensor> LogitStats::tensors() const {
  Tensor counts({counts_.size()});
  for (std::size_t c = 0; c < counts_.size(); ++c) counts[c] = static_cast<double>(counts_[c]);
  return {means(), counts};
}

}  // namespace fedkd
