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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "fedkd/data/sources.hpp"
#include "fedkd/error.hpp"

using namespace fedkd;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("fedkd_test_" + name);
  fs::create_directories(dir);
  return dir;
}

std::vector<int> balanced_labels(int classes, int per_class) {
  std::vector<int> ys;
  for (int c = 0; c < classes; ++c) {
    for (int i = 0; i < per_class; ++i) ys.push_back(c);
  }
  return ys;
}

}  // namespace

TEST_CASE("make_prototype shapes, labels and disjoint coverage") {
  PrototypeConfig cfg;
  cfg.samples_per_cluster = 200;
  cfg.test_per_cluster = 50;
  auto task = make_prototype(3, cfg);
  task.pool.validate();
  task.test.validate();
  CHECK(task.pool.features.cols() == 2);
  CHECK(task.test.features.cols() == 2);
  CHECK(task.pool.size() == 600);
  CHECK(task.test.size() == 150);
  for (const auto& u : task.users) {
    CHECK(u.features.cols() == 2);
    for (int y : u.labels) CHECK((y >= 0 && y < 3));
  }
  check_partition(task.partition, task.pool.size());
  CHECK(task.partition.total() == task.pool.size());

  // User k holds the major share of class k.
  for (int k = 0; k < 3; ++k) {
    auto counts = count_labels(task.users[static_cast<std::size_t>(k)].labels, 3);
    CHECK(counts[k] == 180);
    for (int c = 0; c < 3; ++c) {
      if (c != k) CHECK(counts[c] == 10);
    }
  }

  auto again = make_prototype(3, cfg);
  CHECK(again.pool.features.identical(task.pool.features));
}

TEST_CASE("IDX writer/reader round-trip is bit-exact") {
  auto dir = scratch_dir("idx_roundtrip");
  std::mt19937_64 rng(1);
  IdxImages img;
  img.rows = 4;
  img.cols = 3;
  img.pixels.resize(5 * 12);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() & 0xff);
  std::vector<std::uint8_t> labels{0, 9, 3, 3, 7};
  write_idx_images(dir / "img", img);
  write_idx_labels(dir / "lab", labels);

  auto img2 = read_idx_images(dir / "img");
  CHECK(img2.rows == 4);
  CHECK(img2.cols == 3);
  CHECK(img2.pixels == img.pixels);
  CHECK(read_idx_labels(dir / "lab") == labels);

  auto ds = load_idx(dir / "img", dir / "lab");
  CHECK(ds.features.shape() == Shape{5, 12});
  CHECK(ds.num_classes == 10);
  for (std::size_t i = 0; i < ds.features.size(); ++i) {
    CHECK(ds.features[i] >= 0.0);
    CHECK(ds.features[i] <= 1.0);
    CHECK(ds.features[i] == img.pixels[i] / 255.0);
  }

  // Header bytes are big-endian.
  std::ifstream raw(dir / "img", std::ios::binary);
  unsigned char head[4];
  raw.read(reinterpret_cast<char*>(head), 4);
  CHECK(head[0] == 0x00);
  CHECK(head[1] == 0x00);
  CHECK(head[2] == 0x08);
  CHECK(head[3] == 0x03);
}

TEST_CASE("IDX parse errors are distinct") {
  auto dir = scratch_dir("idx_errors");
  IdxImages img;
  img.rows = 2;
  img.cols = 2;
  img.pixels.assign(3 * 4, 17);
  write_idx_images(dir / "img", img);
  write_idx_labels(dir / "lab", {1, 2, 3});
  write_idx_labels(dir / "lab_short", {1, 2});

  auto kind_of = [](auto&& fn) {
    try {
      fn();
    } catch (const ParseError& e) {
      return e.kind();
    }
    return ParseError::Kind::kIo;
  };

  // Swapped files: label magic where image magic is expected and vice versa.
  CHECK(kind_of([&] { (void)read_idx_images(dir / "lab"); }) == ParseError::Kind::kBadMagic);
  CHECK(kind_of([&] { (void)read_idx_labels(dir / "img"); }) == ParseError::Kind::kBadMagic);
  CHECK(kind_of([&] { (void)load_idx(dir / "img", dir / "lab_short"); }) == ParseError::Kind::kCountMismatch);

  // Truncate the payload.
  fs::copy_file(dir / "img", dir / "img_trunc", fs::copy_options::overwrite_existing);
  fs::resize_file(dir / "img_trunc", fs::file_size(dir / "img") - 3);
  CHECK(kind_of([&] { (void)read_idx_images(dir / "img_trunc"); }) == ParseError::Kind::kTruncated);
  fs::resize_file(dir / "img_trunc", 6);
  CHECK(kind_of([&] { (void)read_idx_images(dir / "img_trunc"); }) == ParseError::Kind::kTruncated);

  CHECK_THROWS_AS(read_idx_images(dir / "does_not_exist"), ParseError);
  CHECK(load_idx(dir / "img", dir / "lab").size() == 3);
}

TEST_CASE("largest_remainder conserves totals") {
  std::vector<double> w{0.5, 0.25, 0.25};
  CHECK(largest_remainder(10, w) == std::vector<std::size_t>{5, 3, 2});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> weights(1 + trial % 9);
    for (auto& v : weights) v = u(rng) + 1e-9;
    const std::size_t total = static_cast<std::size_t>(trial * 7 % 101);
    auto parts = largest_remainder(total, weights);
    std::size_t sum = 0;
    for (auto p : parts) sum += p;
    CHECK(sum == total);
  }
}

TEST_CASE("dirichlet_partition disjointness and coverage sweep") {
  auto labels = balanced_labels(10, 40);
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> pick_k(1, 20);
  const double alphas[] = {0.05, 0.1, 0.5, 1.0, 10.0, 1000.0};
  int ok = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto k = static_cast<std::size_t>(pick_k(rng));
    const double alpha = alphas[trial % 6];
    Partition part;
    try {
      part = dirichlet_partition(labels, 10, k, alpha, static_cast<std::uint64_t>(trial));
    } catch (const ContractError&) {
      continue;  // legal: persistent empty client at extreme skew
    }
    check_partition(part, labels.size());
    CHECK(part.total() == labels.size());
    for (const auto& c : part.clients) CHECK(!c.empty());
    ++ok;
  }
  CHECK(ok >= 190);
}

TEST_CASE("dirichlet_partition is a pure function of its inputs") {
  auto labels = balanced_labels(5, 30);
  auto a = dirichlet_partition(labels, 5, 6, 0.3, 99);
  auto b = dirichlet_partition(labels, 5, 6, 0.3, 99);
  CHECK(a.clients == b.clients);
  auto c = dirichlet_partition(labels, 5, 6, 0.3, 100);
  CHECK(a.clients != c.clients);
}

TEST_CASE("dirichlet_partition near-uniform at very large alpha") {
  auto labels = balanced_labels(10, 400);
  auto part = dirichlet_partition(labels, 10, 4, 1e6, 5);
  for (const auto& client : part.clients) {
    std::vector<int> ys;
    for (auto i : client) ys.push_back(labels[i]);
    auto counts = count_labels(ys, 10);
    for (int c = 0; c < 10; ++c) {
      CHECK(std::abs(static_cast<double>(counts[c]) - 100.0) <= 5.0);
    }
  }
}

TEST_CASE("dirichlet_partition rejects bad arguments") {
  auto labels = balanced_labels(2, 3);
  CHECK_THROWS_AS(dirichlet_partition(labels, 2, 0, 1.0, 1), ContractError);
  CHECK_THROWS_AS(dirichlet_partition(labels, 2, 2, 0.0, 1), ContractError);
  // One sample per client cannot satisfy 10 clients.
  CHECK_THROWS_AS(dirichlet_partition(labels, 2, 10, 1.0, 1), ContractError);
}

TEST_CASE("label counter and prior") {
  std::vector<int> ys{0, 0, 1};
  auto counter = count_labels(ys, 3);
  CHECK(counter.counts() == std::vector<std::int64_t>{2, 1, 0});
  counter.add(std::span<const int>{});
  CHECK(counter.counts() == std::vector<std::int64_t>{2, 1, 0});
  CHECK(counter.total() == 3);

  std::vector<int> a{0, 0, 0, 1};
  std::vector<int> b{0, 1, 1, 1};
  std::vector<LabelCounter> counters{count_labels(a, 2), count_labels(b, 2)};
  auto prior = aggregate_prior(counters);
  CHECK(prior.probs == std::vector<double>{0.5, 0.5});

  std::vector<int> only_one{1, 1, 1, 1};
  std::vector<LabelCounter> single{count_labels(only_one, 2)};
  CHECK(aggregate_prior(single).probs == std::vector<double>{0.0, 1.0});

  std::vector<LabelCounter> zeros{LabelCounter(4)};
  CHECK_THROWS_AS(aggregate_prior(zeros), ContractError);
  CHECK_THROWS_AS(aggregate_prior(std::span<const LabelCounter>{}), ContractError);

  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> pick(0, 6);
  std::vector<LabelCounter> many;
  for (int k = 0; k < 5; ++k) {
    std::vector<int> draw(13);
    for (int& y : draw) y = pick(rng);
    many.push_back(count_labels(draw, 7));
  }
  double sum = 0.0;
  for (double p : aggregate_prior(many).probs) sum += p;
  CHECK(std::abs(sum - 1.0) <= 1e-12);
}

TEST_CASE("stratified_sample keeps class proportions") {
  auto labels = balanced_labels(4, 50);
  auto idx = stratified_sample(labels, 4, 0.1, 3);
  CHECK(idx.size() == 20);
  std::vector<int> ys;
  for (auto i : idx) ys.push_back(labels[i]);
  CHECK(count_labels(ys, 4).counts() == std::vector<std::int64_t>{5, 5, 5, 5});
  CHECK(std::is_sorted(idx.begin(), idx.end()));
}
