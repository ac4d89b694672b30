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

#include "fedkd/data/sources.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <string>

#include "fedkd/error.hpp"
#include "fedkd/rng.hpp"

namespace fedkd {
namespace {

// ----------------------------------------------------------------- prototype

void append_cluster(Rng& rng, const PrototypeConfig& cfg, int label, std::size_t n, std::vector<double>& xs,
                    std::vector<int>& ys) {
  const double angle = (90.0 + 120.0 * label) * std::numbers::pi / 180.0;
  const double cx = cfg.radius * std::cos(angle);
  const double cy = cfg.radius * std::sin(angle);
  std::normal_distribution<double> noise(0.0, cfg.sigma);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = cx + noise(rng);
    const double y = cy + noise(rng);
    xs.push_back(x);
    xs.push_back(y);
    ys.push_back(label);
  }
}

Dataset make_dataset(std::vector<double> xs, std::vector<int> ys, std::size_t dim, int classes) {
  Dataset d;
  const std::size_t n = ys.size();
  d.features = Tensor({n, dim}, std::move(xs));
  d.labels = std::move(ys);
  d.num_classes = classes;
  return d;
}

// ----------------------------------------------------------------------- IDX

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw ParseError(ParseError::Kind::kTruncated, "idx: truncated header in " + path.string());
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::ifstream open_idx(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseError::Kind::kIo, "idx: cannot open " + path.string());
  return in;
}

void expect_magic(std::uint32_t got, std::uint32_t want, const std::filesystem::path& path) {
  if (got != want) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "0x%08x (expected 0x%08x)", got, want);
    throw ParseError(ParseError::Kind::kBadMagic, "idx: bad magic " + std::string(buf) + " in " + path.string());
  }
}

std::vector<std::uint8_t> read_payload(std::istream& in, std::size_t n, const std::filesystem::path& path) {
  std::vector<std::uint8_t> buf(n);
  if (n && !in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n))) {
    throw ParseError(ParseError::Kind::kTruncated, "idx: expected " + std::to_string(n) + " payload bytes in " +
                                                       path.string() + ", got " + std::to_string(in.gcount()));
  }
  return buf;
}

// -------------------------------------------------------------- partitioning

std::vector<double> sample_dirichlet(Rng& rng, std::size_t k, double alpha) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  for (;;) {
    std::vector<double> q(k);
    double sum = 0.0;
    for (auto& v : q) {
      v = gamma(rng);
      sum += v;
    }
    if (sum > 0.0 && std::isfinite(sum)) {
      for (auto& v : q) v /= sum;
      return q;
    }
  }
}

}  // namespace

PrototypeTask make_prototype(std::uint64_t seed, const PrototypeConfig& cfg) {
  if (cfg.samples_per_cluster < 1) throw ContractError("make_prototype: samples_per_cluster must be >= 1");
  if (cfg.major_share < 0.0 || cfg.major_share > 1.0) throw ContractError("make_prototype: major_share outside [0,1]");
  Rng rng = make_rng(seed, StreamTag::kData, {0x70726f74});

  PrototypeTask task;
  std::vector<double> xs;
  std::vector<int> ys;
  for (int c = 0; c < 3; ++c) append_cluster(rng, cfg, c, cfg.samples_per_cluster, xs, ys);
  task.pool = make_dataset(std::move(xs), std::move(ys), 2, 3);

  // Class c occupies pool rows [c*n, (c+1)*n). Each minority user receives
  // round(n * (1 - share) / 2) of them; the owner keeps the rest.
  const std::size_t n = cfg.samples_per_cluster;
  const auto minor = static_cast<std::size_t>(std::llround(static_cast<double>(n) * (1.0 - cfg.major_share) / 2.0));
  task.partition.clients.resize(3);
  for (int c = 0; c < 3; ++c) {
    const std::size_t base = static_cast<std::size_t>(c) * n;
    std::size_t cursor = base;
    for (int k = 0; k < 3; ++k) {
      const std::size_t take = (k == c) ? n - 2 * minor : minor;
      auto& dst = task.partition.clients[static_cast<std::size_t>(k)];
      for (std::size_t i = 0; i < take; ++i) dst.push_back(cursor++);
    }
  }
  for (auto& client : task.partition.clients) std::sort(client.begin(), client.end());
  for (std::size_t k = 0; k < 3; ++k) task.users[k] = task.pool.subset(task.partition.clients[k]);

  std::vector<double> tx;
  std::vector<int> ty;
  for (int c = 0; c < 3; ++c) append_cluster(rng, cfg, c, cfg.test_per_cluster, tx, ty);
  task.test = make_dataset(std::move(tx), std::move(ty), 2, 3);
  return task;
}

IdxImages read_idx_images(const std::filesystem::path& path) {
  auto in = open_idx(path);
  expect_magic(read_be32(in, path), kIdxImageMagic, path);
  const std::uint32_t count = read_be32(in, path);
  IdxImages img;
  img.rows = read_be32(in, path);
  img.cols = read_be32(in, path);
  if (img.rows == 0 || img.cols == 0) {
    throw ParseError(ParseError::Kind::kBadHeader, "idx: zero image dimension in " + path.string());
  }
  img.pixels = read_payload(in, std::size_t{count} * img.rows * img.cols, path);
  return img;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  auto in = open_idx(path);
  expect_magic(read_be32(in, path), kIdxLabelMagic, path);
  const std::uint32_t count = read_be32(in, path);
  return read_payload(in, count, path);
}

void write_idx_images(const std::filesystem::path& path, const IdxImages& images) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(ParseError::Kind::kIo, "idx: cannot write " + path.string());
  write_be32(out, kIdxImageMagic);
  write_be32(out, static_cast<std::uint32_t>(images.count()));
  write_be32(out, images.rows);
  write_be32(out, images.cols);
  out.write(reinterpret_cast<const char*>(images.pixels.data()), static_cast<std::streamsize>(images.pixels.size()));
}

void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(ParseError::Kind::kIo, "idx: cannot write " + path.string());
  write_be32(out, kIdxLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::optional<int> num_classes) {
  const IdxImages img = read_idx_images(images);
  const std::vector<std::uint8_t> lab = read_idx_labels(labels);
  if (img.count() != lab.size()) {
    throw ParseError(ParseError::Kind::kCountMismatch, "idx: " + std::to_string(img.count()) + " images but " +
                                                           std::to_string(lab.size()) + " labels");
  }
  if (lab.empty()) throw ParseError(ParseError::Kind::kBadHeader, "idx: zero samples in " + labels.string());

  const std::size_t dim = std::size_t{img.rows} * img.cols;
  Dataset d;
  d.features = Tensor({lab.size(), dim});
  for (std::size_t i = 0; i < img.pixels.size(); ++i) d.features[i] = img.pixels[i] / 255.0;
  d.labels.assign(lab.begin(), lab.end());
  const int max_label = *std::max_element(d.labels.begin(), d.labels.end());
  d.num_classes = num_classes.value_or(max_label + 1);
  d.validate();
  return d;
}

std::vector<std::size_t> largest_remainder(std::size_t total, std::span<const double> weights) {
  std::vector<std::size_t> out(weights.size(), 0);
  if (weights.empty()) return out;
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(wsum > 0.0)) throw ContractError("largest_remainder: weights must have positive sum");
  std::vector<double> rem(weights.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(total) * weights[i] / wsum;
    out[i] = static_cast<std::size_t>(std::floor(exact));
    rem[i] = exact - static_cast<double>(out[i]);
    assigned += out[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t i = 0; assigned < total; i = (i + 1) % order.size(), ++assigned) ++out[order[i]];
  return out;
}

Partition dirichlet_partition(std::span<const int> labels, int num_classes, std::size_t num_clients, double alpha,
                              std::uint64_t seed) {
  if (num_clients < 1) throw ContractError("dirichlet_partition: need at least one client");
  if (!(alpha > 0.0)) throw ContractError("dirichlet_partition: alpha must be positive");
  if (labels.size() < num_clients) {
    throw ContractError("dirichlet_partition: " + std::to_string(labels.size()) + " samples cannot cover " +
                        std::to_string(num_clients) + " clients");
  }

  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) throw ContractError("dirichlet_partition: label out of range");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }

  Rng rng = make_rng(seed, StreamTag::kPartition);
  constexpr int kMaxAttempts = 10;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Partition part;
    part.clients.resize(num_clients);
    for (const auto& members : by_class) {
      std::vector<std::size_t> shuffled = members;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      const auto q = sample_dirichlet(rng, num_clients, alpha);
      const auto counts = largest_remainder(shuffled.size(), q);
      std::size_t cursor = 0;
      for (std::size_t k = 0; k < num_clients; ++k) {
        for (std::size_t j = 0; j < counts[k]; ++j) part.clients[k].push_back(shuffled[cursor++]);
      }
    }
    const bool any_empty = std::any_of(part.clients.begin(), part.clients.end(),
                                       [](const auto& c) { return c.empty(); });
    if (!any_empty) {
      for (auto& c : part.clients) std::sort(c.begin(), c.end());
      return part;
    }
  }
  throw ContractError("dirichlet_partition: a client received no samples after " + std::to_string(kMaxAttempts) +
                      " draws (K=" + std::to_string(num_clients) + ", alpha=" + std::to_string(alpha) + ")");
}

std::vector<std::size_t> stratified_sample(std::span<const int> labels, int num_classes, double fraction,
                                           std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0) throw ContractError("stratified_sample: fraction outside [0,1]");
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  Rng rng = make_rng(seed, StreamTag::kData, {0x7375627});
  std::vector<std::size_t> out;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(members.size())));
    out.insert(out.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fedkd
