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

#include "fedkd/numerics/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "fedkd/error.hpp"

namespace fedkd {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

ConstMap as_matrix(const Tensor& t) {
  return ConstMap(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

MutMap as_matrix(Tensor& t) {
  return MutMap(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

void require_rank2(const Tensor& t, const char* what) {
  if (t.rank() != 2) {
    throw ContractError(std::string(what) + ": expected a matrix, got shape " + shape_string(t.shape()));
  }
}

}  // namespace

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != data_.size()) {
    throw ContractError("tensor shape " + shape_string(shape_) + " does not match " +
                        std::to_string(data_.size()) + " elements");
  }
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ContractError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

std::size_t Tensor::rows() const {
  require_rank2(*this, "rows");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  require_rank2(*this, "cols");
  return shape_[1];
}

std::span<double> Tensor::row(std::size_t r) {
  const std::size_t c = cols();
  return {data_.data() + r * c, c};
}

std::span<const double> Tensor::row(std::size_t r) const {
  const std::size_t c = cols();
  return {data_.data() + r * c, c};
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool Tensor::identical(const Tensor& other) const noexcept {
  return shape_ == other.shape_ &&
         (data_.empty() || std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(double)) == 0);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  if (a.cols() != b.rows()) {
    throw ContractError("matmul: inner dimensions differ: " + shape_string(a.shape()) + " * " +
                        shape_string(b.shape()));
  }
  Tensor out({a.rows(), b.cols()});
  if (out.empty()) return out;
  if (a.cols() == 0) return out;
  as_matrix(out).noalias() = as_matrix(a) * as_matrix(b);
  return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul_tn");
  require_rank2(b, "matmul_tn");
  if (a.rows() != b.rows()) {
    throw ContractError("matmul_tn: row counts differ: " + shape_string(a.shape()) + " vs " +
                        shape_string(b.shape()));
  }
  Tensor out({a.cols(), b.cols()});
  if (out.empty() || a.rows() == 0) return out;
  as_matrix(out).noalias() = as_matrix(a).transpose() * as_matrix(b);
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul_nt");
  require_rank2(b, "matmul_nt");
  if (a.cols() != b.cols()) {
    throw ContractError("matmul_nt: column counts differ: " + shape_string(a.shape()) + " vs " +
                        shape_string(b.shape()));
  }
  Tensor out({a.rows(), b.rows()});
  if (out.empty() || a.cols() == 0) return out;
  as_matrix(out).noalias() = as_matrix(a) * as_matrix(b).transpose();
  return out;
}

Tensor gather_rows(const Tensor& m, std::span<const std::size_t> rows) {
  const std::size_t c = m.cols();
  Tensor out({rows.size(), c});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= m.rows()) {
      throw ContractError("gather_rows: row " + std::to_string(rows[i]) + " out of range for " +
                          shape_string(m.shape()));
    }
    std::memcpy(out.data() + i * c, m.data() + rows[i] * c, c * sizeof(double));
  }
  return out;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) {
    throw ContractError("concat_cols: row counts differ: " + shape_string(a.shape()) + " vs " +
                        shape_string(b.shape()));
  }
  const std::size_t ca = a.cols();
  const std::size_t cb = b.cols();
  Tensor out({a.rows(), ca + cb});
  for (std::size_t r = 0; r < a.rows(); ++r) {
    std::memcpy(out.data() + r * (ca + cb), a.data() + r * ca, ca * sizeof(double));
    std::memcpy(out.data() + r * (ca + cb) + ca, b.data() + r * cb, cb * sizeof(double));
  }
  return out;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ContractError(std::string(what) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                        shape_string(b.shape()));
  }
}

void add_inplace(Tensor& dst, const Tensor& src, double scale) {
  require_same_shape(dst, src, "add_inplace");
  double* d = dst.data();
  const double* s = src.data();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += scale * s[i];
}

void scale_inplace(Tensor& t, double s) {
  for (double& v : t.values()) v *= s;
}

double squared_norm(const Tensor& t) {
  double acc = 0.0;
  for (double v : t.values()) acc += v * v;
  return acc;
}

double squared_distance(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "squared_distance");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace fedkd
