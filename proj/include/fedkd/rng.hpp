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
#include <initializer_list>
#include <random>
#include <vector>

namespace fedkd {

using Rng = std::mt19937_64;

/// Stream tags keep independent consumers of the same experiment seed apart.
enum class StreamTag : std::uint64_t {
  kModelInit = 1,
  kData = 2,
  kPartition = 3,
  kServer = 4,
  kClient = 5,
  kGenerator = 6,
  kFusion = 7,
  kEval = 8,
};

/// Deterministic generator keyed by (seed, tag, extra keys...).
inline Rng make_rng(std::uint64_t seed, StreamTag tag, std::initializer_list<std::uint64_t> keys = {}) {
  std::vector<std::uint32_t> words;
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  push(static_cast<std::uint64_t>(tag));
  for (auto k : keys) push(k);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace fedkd
