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
#include <random>

#include "fedkd/error.hpp"
#include "fedkd/numerics/dense.hpp"
#include "fedkd/numerics/gradcheck.hpp"
#include "fedkd/numerics/losses.hpp"
#include "fedkd/numerics/optimizer.hpp"

using namespace fedkd;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& v : t.values()) v = u(rng);
  return t;
}

// Sum of upstream * output: a scalar whose gradient w.r.t. the layer output is
// exactly `upstream`.
double weighted_output(const DenseLayer& layer, const Tensor& x, const Tensor& upstream) {
  Tensor y = dense_apply(layer, x);
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += y[i] * upstream[i];
  return acc;
}

}  // namespace

TEST_CASE("dense_forward closed-form cases") {
  DenseLayer id(2, 2, Activation::identity());
  id.weights = Tensor::matrix({{1, 0}, {0, 1}});
  auto out = dense_forward(id, Tensor::matrix({{3, 4}}));
  CHECK(out.output.identical(Tensor::matrix({{3, 4}})));

  DenseLayer clamp(2, 1, Activation::relu());
  clamp.weights = Tensor::matrix({{1}, {1}});
  clamp.bias = Tensor::vector({-5});
  CHECK(dense_forward(clamp, Tensor::matrix({{2, 2}})).output[0] == 0.0);
}

TEST_CASE("dense_forward rejects mismatched input and names both shapes") {
  DenseLayer layer(3, 2, Activation::relu());
  try {
    (void)dense_forward(layer, Tensor({1, 4}));
    FAIL("expected ContractError");
  } catch (const ContractError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[1x4]") != std::string::npos);
    CHECK(msg.find("[3x2]") != std::string::npos);
  }
}

TEST_CASE("dense_backward closed forms for identity activation") {
  std::mt19937_64 rng(7);
  DenseLayer layer(3, 2, Activation::identity());
  layer.weights = random_tensor({3, 2}, rng);
  Tensor x = random_tensor({1, 3}, rng);
  auto fwd = dense_forward(layer, x);
  Tensor ones({1, 2}, 1.0);
  auto g = dense_backward(layer, fwd.tape, ones);
  CHECK(g.bias.identical(Tensor::vector({1.0, 1.0})));
  CHECK(g.weights.identical(matmul_tn(x, ones)));

  Tensor x4 = random_tensor({4, 3}, rng);
  Tensor up = random_tensor({4, 2}, rng);
  auto fwd4 = dense_forward(layer, x4);
  auto g4 = dense_backward(layer, fwd4.tape, up);
  Tensor expected = matmul_tn(x4, up);
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(g4.weights[i] == doctest::Approx(expected[i]).epsilon(1e-14));
}

TEST_CASE("dense_backward refuses a reused tape") {
  DenseLayer layer(2, 2, Activation::relu());
  auto fwd = dense_forward(layer, Tensor({1, 2}, 1.0));
  Tensor up({1, 2}, 1.0);
  (void)dense_backward(layer, fwd.tape, up);
  CHECK_THROWS_AS(dense_backward(layer, fwd.tape, up), ContractError);
}

TEST_CASE("dense layer gradients match central differences") {
  for (auto act : {Activation::identity(), Activation::relu(), Activation::leaky_relu(0.2)}) {
    CAPTURE(activation_name(act));
    std::mt19937_64 rng(11);
    DenseLayer layer(3, 4, act);
    layer.weights = random_tensor({3, 4}, rng);
    layer.bias = random_tensor({4}, rng);
    Tensor x = random_tensor({5, 3}, rng);
    Tensor up = random_tensor({5, 4}, rng);

    auto fwd = dense_forward(layer, x);
    auto g = dense_backward(layer, fwd.tape, up);
    auto loss = [&] { return weighted_output(layer, x, up); };

    std::vector<Tensor*> params{&layer.weights, &layer.bias, &x};
    std::vector<Tensor> analytic{g.weights, g.bias, g.input};
    auto report = gradient_check(loss, params, analytic, 1e-5);
    CHECK(report.worst <= 1e-4);
  }
}

TEST_CASE("softmax properties") {
  auto half = softmax(Tensor::matrix({{0, 0}}));
  CHECK(half[0] == 0.5);
  CHECK(half[1] == 0.5);

  auto big = softmax(Tensor::matrix({{1000, 0}}));
  CHECK(big.all_finite());
  CHECK(big[0] == doctest::Approx(1.0));
  CHECK(big[1] == doctest::Approx(0.0));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor logits = random_tensor({8, 10}, rng, 20.0);
    Tensor p = softmax(logits);
    Tensor shifted = logits;
    for (std::size_t r = 0; r < 8; ++r) {
      const double s = static_cast<double>(r) * 13.7 - 40.0;
      for (double& v : shifted.row(r)) v += s;
    }
    Tensor ps = softmax(shifted);
    for (std::size_t r = 0; r < 8; ++r) {
      double sum = 0.0;
      for (double v : p.row(r)) {
        CHECK(v >= 0.0);
        sum += v;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(p[i] - ps[i]) <= 1e-12);
  }
}

TEST_CASE("cross_entropy values and errors") {
  Tensor uniform({1, 10}, 0.1);
  const int label = 4;
  auto ce = cross_entropy(uniform, std::span<const int>(&label, 1));
  CHECK(ce.value == doctest::Approx(std::log(10.0)).epsilon(1e-12));

  Tensor onehot({2, 3});
  onehot.at(0, 1) = 1.0;
  onehot.at(1, 2) = 1.0;
  std::vector<int> ys{1, 2};
  CHECK(cross_entropy(onehot, ys).value == 0.0);

  std::vector<int> bad{1, 3};
  try {
    (void)cross_entropy(onehot, bad);
    FAIL("expected ContractError");
  } catch (const ContractError& e) {
    CHECK(std::string(e.what()).find("index 1") != std::string::npos);
  }

  // Non-negativity on random rows.
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pick(0, 5);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor logits = random_tensor({4, 6}, rng, 5.0);
    std::vector<int> labels(4);
    for (int& y : labels) y = pick(rng);
    CHECK(cross_entropy_with_logits(logits, labels).value >= 0.0);
  }
}

TEST_CASE("cross_entropy gradient through softmax matches finite differences") {
  std::mt19937_64 rng(9);
  Tensor logits = random_tensor({6, 5}, rng, 2.0);
  std::vector<int> labels{0, 4, 2, 2, 1, 3};
  auto res = cross_entropy(softmax(logits), labels);
  auto loss = [&] { return cross_entropy(softmax(logits), labels).value; };
  std::vector<Tensor*> params{&logits};
  std::vector<Tensor> analytic{res.grad};
  CHECK(gradient_check(loss, params, analytic).worst <= 1e-4);

  auto stable = cross_entropy_with_logits(logits, labels);
  CHECK(stable.value == doctest::Approx(res.value).epsilon(1e-12));
  for (std::size_t i = 0; i < res.grad.size(); ++i) CHECK(stable.grad[i] == doctest::Approx(res.grad[i]).epsilon(1e-12));
}

TEST_CASE("kl_divergence values, Gibbs inequality and gradient") {
  Tensor p = Tensor::matrix({{1.0, 0.0}});
  Tensor q = Tensor::matrix({{0.5, 0.5}});
  CHECK(kl_divergence(p, q).value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(kl_divergence(q, q).value == 0.0);
  CHECK_THROWS_AS(kl_divergence(q, p), NumericError);

  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor a = softmax(random_tensor({3, 7}, rng, 4.0));
    Tensor b = softmax(random_tensor({3, 7}, rng, 4.0));
    CHECK(kl_divergence(a, b).value >= -1e-12);
    CHECK(kl_divergence(a, a).value == 0.0);
  }

  Tensor target = softmax(random_tensor({4, 5}, rng, 2.0));
  Tensor logits = random_tensor({4, 5}, rng, 2.0);
  auto res = kl_divergence(target, softmax(logits));
  auto loss = [&] { return kl_divergence(target, softmax(logits)).value; };
  std::vector<Tensor*> params{&logits};
  std::vector<Tensor> analytic{res.grad};
  CHECK(gradient_check(loss, params, analytic).worst <= 1e-4);
}

TEST_CASE("optimizer steps") {
  Tensor theta = Tensor::vector({1.0});
  Optimizer sgd(OptimizerConfig::sgd(0.01));
  sgd.step(theta, Tensor::vector({0.5}));
  CHECK(theta[0] == doctest::Approx(0.995).epsilon(1e-15));
  CHECK(sgd.steps() == 1);

  // Reference Adam recurrence at t = 1: m = (1-b1) g, v = (1-b2) g^2,
  // mhat = g, vhat = g^2, step = lr * g / (|g| + eps).
  Tensor a = Tensor::vector({1.0});
  Optimizer adam(OptimizerConfig::adam(1e-4));
  adam.step(a, Tensor::vector({0.5}));
  const double expected = 1.0 - 1e-4 * (0.5 / (0.5 + 1e-8));
  CHECK(a[0] == doctest::Approx(expected).epsilon(1e-14));

  for (auto cfg : {OptimizerConfig::sgd(0.3), OptimizerConfig::adam(0.3)}) {
    Optimizer opt(cfg);
    Tensor p = Tensor::vector({0.25, -3.0, 7.5});
    const Tensor before = p;
    opt.step(p, Tensor({3}));
    CHECK(p.identical(before));
  }

  Optimizer bad(OptimizerConfig::sgd(0.1));
  Tensor two({2});
  CHECK_THROWS_AS(bad.step(two, Tensor({3})), ContractError);
}

TEST_CASE("gradient_check on a two-layer MLP with softmax cross-entropy") {
  std::mt19937_64 rng(31);
  DenseLayer l1(3, 5, Activation::relu());
  DenseLayer l2(5, 4, Activation::identity());
  l1.init_glorot(rng);
  l2.init_glorot(rng);
  l1.bias = random_tensor({5}, rng, 0.1);
  Tensor x = random_tensor({4, 3}, rng);
  std::vector<int> labels{0, 3, 1, 3};

  auto f1 = dense_forward(l1, x);
  auto f2 = dense_forward(l2, f1.output);
  auto ce = cross_entropy_with_logits(f2.output, labels);
  auto g2 = dense_backward(l2, f2.tape, ce.grad);
  auto g1 = dense_backward(l1, f1.tape, g2.input);

  auto loss = [&] { return cross_entropy_with_logits(dense_apply(l2, dense_apply(l1, x)), labels).value; };
  std::vector<Tensor*> params{&l1.weights, &l1.bias, &l2.weights, &l2.bias};
  std::vector<Tensor> analytic{g1.weights, g1.bias, g2.weights, g2.bias};
  auto report = gradient_check(loss, params, analytic);
  CHECK(report.max_rel_error.size() == 4);
  CHECK(report.worst <= 1e-4);
}

TEST_CASE("linear softmax model gradient equals the closed form X^T(P - Y)/B") {
  std::mt19937_64 rng(41);
  DenseLayer lin(4, 3, Activation::identity());
  lin.init_glorot(rng);
  Tensor x = random_tensor({6, 4}, rng);
  std::vector<int> labels{0, 1, 2, 2, 1, 0};

  auto fwd = dense_forward(lin, x);
  Tensor probs;
  auto ce = cross_entropy_with_logits(fwd.output, labels, &probs);
  auto g = dense_backward(lin, fwd.tape, ce.grad);

  // Closed form, built without the loss's gradient.
  Tensor residual = probs;
  for (std::size_t i = 0; i < labels.size(); ++i) residual.at(i, static_cast<std::size_t>(labels[i])) -= 1.0;
  Tensor closed({4, 3});
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < 6; ++i) acc += x.at(i, r) * residual.at(i, c);
      closed.at(r, c) = acc / 6.0;
    }
  }
  for (std::size_t i = 0; i < closed.size(); ++i) CHECK(std::abs(g.weights[i] - closed[i]) <= 1e-10);
}
