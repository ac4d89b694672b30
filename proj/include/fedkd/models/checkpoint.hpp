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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "fedkd/numerics/tensor.hpp"

namespace fedkd {

// Parameter blob layout (all integers little-endian):
//
//   "FKDP"            4 bytes magic
//   version  u32      currently 1
//   count    u32      number of tensors
//   count x { rank u32, rank x dim u64 }   shape table
//   payload  f64[]    every tensor's data, contiguous, in table order
//
// The blob is also the unit used to measure client<->server message sizes.

inline constexpr std::uint32_t kBlobVersion = 1;

std::vector<std::uint8_t> encode_tensors(std::span<const Tensor> tensors);
std::vector<Tensor> decode_tensors(std::span<const std::uint8_t> blob);

/// Size encode_tensors would produce, without materializing it.
std::size_t encoded_size(std::span<const Tensor> tensors);

/// Writes `<base>.bin` (blob) and `<base>.json` (metadata).
void save_checkpoint(const std::filesystem::path& base, std::span<const Tensor> tensors,
                     const nlohmann::json& metadata);

struct Checkpoint {
  std::vector<Tensor> tensors;
  nlohmann::json metadata;
};
Checkpoint load_checkpoint(const std::filesystem::path& base);

}  // namespace fedkd
