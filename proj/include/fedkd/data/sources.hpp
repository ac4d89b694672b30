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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "fedkd/data/dataset.hpp"

namespace fedkd {

// ---------------------------------------------------------------------------
// Synthetic three-user task: three isotropic Gaussians in R^2 whose means sit
// at 90/210/330 degrees on a circle. User k holds most of class k and a small
// slice of the other two classes, so each local model is biased towards its
// own class while the pooled data is balanced.
// ---------------------------------------------------------------------------

struct PrototypeConfig {
  std::size_t samples_per_cluster = 400;
  std::size_t test_per_cluster = 1000;
  double radius = 3.0;
  double sigma = 0.9;
  double major_share = 0.9;  // share of class k kept by user k
};

struct PrototypeTask {
  Dataset pool;               // pooled training data
  Partition partition;        // three disjoint index lists covering `pool`
  std::array<Dataset, 3> users;
  Dataset test;               // iid draw from the global mixture
};

PrototypeTask make_prototype(std::uint64_t seed, const PrototypeConfig& config = {});

// ---------------------------------------------------------------------------
// IDX (MNIST-style) files.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Loads an image/label pair, scaling pixels to [0,1] and flattening each
/// image. `num_classes` defaults to max(label)+1.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::optional<int> num_classes = std::nullopt);

/// Raw IDX contents, before scaling.
struct IdxImages {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols
  std::size_t count() const { return rows && cols ? pixels.size() / (rows * cols) : 0; }
};

IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);
void write_idx_images(const std::filesystem::path& path, const IdxImages& images);
void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels);

// ---------------------------------------------------------------------------
// Non-iid partitioning and subsampling.
// ---------------------------------------------------------------------------

/// For each class, draws proportions q ~ Dir(alpha * 1_K) and splits that
/// class's (shuffled) indices across clients with largest-remainder rounding.
/// Redraws up to 10 times if some client ends up empty, then throws.
Partition dirichlet_partition(std::span<const int> labels, int num_classes, std::size_t num_clients,
                              double alpha, std::uint64_t seed);

/// Splits a count into integer parts proportional to `weights` so that they
/// sum exactly to `total`. Ties in the remainders go to the lower index.
std::vector<std::size_t> largest_remainder(std::size_t total, std::span<const double> weights);

/// Class-stratified sample of round(fraction * N_c) indices per class,
/// returned in ascending order.
std::vector<std::size_t> stratified_sample(std::span<const int> labels, int num_classes, double fraction,
                                           std::uint64_t seed);

}  // namespace fedkd
