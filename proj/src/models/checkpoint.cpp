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

#include "fedkd/models/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <string>

#include "fedkd/error.hpp"

namespace fedkd {
namespace {

constexpr std::uint8_t kMagic[4] = {'F', 'K', 'D', 'P'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> buf) : buf_(buf) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > buf_.size()) {
      throw ParseError(ParseError::Kind::kTruncated, "blob: truncated at byte " + std::to_string(pos_));
    }
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    return v;
  }

  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  std::span<const std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t encoded_size(std::span<const Tensor> tensors) {
  std::size_t n = 4 + 4 + 4;
  for (const auto& t : tensors) n += 4 + 8 * t.rank() + 8 * t.size();
  return n;
}

std::vector<std::uint8_t> encode_tensors(std::span<const Tensor> tensors) {
  std::vector<std::uint8_t> out;
  out.reserve(encoded_size(tensors));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, kBlobVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) put_le<std::uint64_t>(out, d);
  }
  for (const auto& t : tensors) {
    for (double v : t.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

std::vector<Tensor> decode_tensors(std::span<const std::uint8_t> blob) {
  if (blob.size() < 12 || !std::equal(std::begin(kMagic), std::end(kMagic), blob.begin())) {
    throw ParseError(ParseError::Kind::kBadMagic, "blob: missing FKDP magic");
  }
  Reader r(blob.subspan(4));
  const auto version = r.get<std::uint32_t>();
  if (version != kBlobVersion) {
    throw ParseError(ParseError::Kind::kBadHeader, "blob: unsupported version " + std::to_string(version));
  }
  const auto count = r.get<std::uint32_t>();
  std::vector<Shape> shapes(count);
  for (auto& s : shapes) {
    const auto rank = r.get<std::uint32_t>();
    if (rank > 8) throw ParseError(ParseError::Kind::kBadHeader, "blob: implausible rank " + std::to_string(rank));
    for (std::uint32_t i = 0; i < rank; ++i) s.push_back(static_cast<std::size_t>(r.get<std::uint64_t>()));
  }
  std::size_t need = 0;
  for (const auto& s : shapes) need += shape_size(s);
  if (r.remaining() != 8 * need) {
    throw ParseError(ParseError::Kind::kCountMismatch, "blob: payload holds " + std::to_string(r.remaining()) +
                                                           " bytes, shape table needs " + std::to_string(8 * need));
  }
  std::vector<Tensor> out;
  out.reserve(count);
  for (const auto& s : shapes) {
    Tensor t(s);
    for (double& v : t.values()) v = std::bit_cast<double>(r.get<std::uint64_t>());
    out.push_back(std::move(t));
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& base, std::span<const Tensor> tensors,
                     const nlohmann::json& metadata) {
  const auto blob = encode_tensors(tensors);
  auto bin = base;
  bin += ".bin";
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw ParseError(ParseError::Kind::kIo, "checkpoint: cannot write " + bin.string());
  out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));

  auto meta_path = base;
  meta_path += ".json";
  std::ofstream meta(meta_path);
  if (!meta) throw ParseError(ParseError::Kind::kIo, "checkpoint: cannot write " + meta_path.string());
  meta << metadata.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& base) {
  auto bin = base;
  bin += ".bin";
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw ParseError(ParseError::Kind::kIo, "checkpoint: cannot open " + bin.string());
  std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  Checkpoint cp;
  cp.tensors = decode_tensors(blob);
  auto meta_path = base;
  meta_path += ".json";
  std::ifstream meta(meta_path);
  if (meta) cp.metadata = nlohmann::json::parse(meta);
  return cp;
}

}  // namespace fedkd
