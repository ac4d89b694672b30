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

#include <functional>
#include <span>
#include <vector>

#include "fedkd/numerics/tensor.hpp"

namespace fedkd {

struct GradCheckReport {
  std::vector<double> max_rel_error;  // one entry per parameter tensor
  double worst = 0.0;

  bool passed(double tolerance) const { return worst <= tolerance; }
};

/// Relative error used by the checker: |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-7);

/// Compares `analytic` against central differences of `loss` taken by
/// perturbing each element of `params` in place (restored afterwards).
/// `loss` must read the current values of `params` and be deterministic.
GradCheckReport gradient_check(const std::function<double()>& loss, std::span<Tensor* const> params,
                               std::span<const Tensor> analytic, double h = 1e-5);

}  // namespace fedkd
