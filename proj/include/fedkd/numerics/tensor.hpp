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
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace fedkd {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

/// Dense row-major array of doubles. Rank 1 and rank 2 cover every use in
/// the library; higher ranks are stored but have no dedicated accessors.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor vector(std::initializer_list<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  // Matrix view helpers; valid for rank-2 tensors.
  std::size_t rows() const;
  std::size_t cols() const;

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }
  double& at(std::size_t r, std::size_t c) noexcept { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const noexcept { return data_[r * shape_[1] + c]; }

  std::span<double> row(std::size_t r);
  std::span<const double> row(std::size_t r) const;

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  void fill(double v);
  bool all_finite() const noexcept;

  /// Bitwise comparison of shape and payload.
  bool identical(const Tensor& other) const noexcept;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Matrix products; all operands rank 2.
Tensor matmul(const Tensor& a, const Tensor& b);     // a * b
Tensor matmul_tn(const Tensor& a, const Tensor& b);  // a^T * b
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // a * b^T

/// Rows selected by index, in the given order.
Tensor gather_rows(const Tensor& m, std::span<const std::size_t> rows);
/// Horizontal concatenation of two matrices with equal row counts.
Tensor concat_cols(const Tensor& a, const Tensor& b);

void add_inplace(Tensor& dst, const Tensor& src, double scale = 1.0);
void scale_inplace(Tensor& t, double s);
double squared_norm(const Tensor& t);
double squared_distance(const Tensor& a, const Tensor& b);

void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

}  // namespace fedkd
