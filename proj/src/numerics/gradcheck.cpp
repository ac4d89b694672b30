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

#include "fedkd/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "fedkd/error.hpp"

namespace fedkd {

double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport gradient_check(const std::function<double()>& loss, std::span<Tensor* const> params,
                               std::span<const Tensor> analytic, double h) {
  if (params.size() != analytic.size()) throw ContractError("gradient_check: parameter/gradient count mismatch");
  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    require_same_shape(p, analytic[k], "gradient_check");
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + h;
      const double up = loss();
      p[i] = saved - h;
      const double down = loss();
      p[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      worst = std::max(worst, relative_error(analytic[k][i], numeric));
    }
    report.max_rel_error.push_back(worst);
    report.worst = std::max(report.worst, worst);
  }
  return report;
}

}  // namespace fedkd
