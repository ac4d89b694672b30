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


#include "fedkd/harness/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "fedkd/data/sources.hpp"
#include "fedkd/error.hpp"
#include "fedkd/harness/experiment.hpp"
#include "fedkd/models/checkpoint.hpp"
#include "fedkd/models/generator.hpp"
#include "fedkd/numerics/gradcheck.hpp"
#include "fedkd/numerics/losses.hpp"
#include "fedkd/protocols/server.hpp"

namespace fedkd {
namespace {

constexpr double kTolerance = 1e-4;

Tensor uniform_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& v : t.values()) v = u(rng);
  return t;
}

SelftestCheck grad_check(const std::string& name, const std::function<double()>& loss, std::vector<Tensor*> params,
                         const std::vector<Tensor>& analytic) {
  const auto report = gradient_check(loss, params, analytic);
  char buf[64];
  std::snprintf(buf, sizeof buf, "max rel err %.2e", report.worst);
  return {name, report.passed(kTolerance), buf};
}

double dot(const Tensor& a, const Tensor& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

std::vector<SelftestCheck> gradient_checks() {
  std::vector<SelftestCheck> out;
  auto rng = make_rng(7, StreamTag::kEval);

  for (auto act : {Activation::identity(), Activation::relu(), Activation::leaky_relu(0.2)}) {
    DenseLayer layer(4, 3, act);
    layer.weights = uniform_tensor({4, 3}, rng);
    layer.bias = uniform_tensor({3}, rng, 0.05, 0.3);
    Tensor x = uniform_tensor({5, 4}, rng);
    const Tensor up = uniform_tensor({5, 3}, rng);
    auto fwd = dense_forward(layer, x);
    auto g = dense_backward(layer, fwd.tape, up);
    out.push_back(grad_check("dense[" + activation_name(act) + "]", [&] { return dot(dense_apply(layer, x), up); },
                             {&layer.weights, &layer.bias, &x}, {g.weights, g.bias, g.input}));
  }

  {
    Tensor logits = uniform_tensor({6, 4}, rng, -3.0, 3.0);
    const std::vector<int> y{0, 3, 1, 2, 2, 0};
    auto ce = cross_entropy(softmax(logits), y);
    out.push_back(grad_check("softmax-ce", [&] { return cross_entropy(softmax(logits), y).value; }, {&logits},
                             {ce.grad}));
  }
  {
    const Tensor p = softmax(uniform_tensor({4, 5}, rng, -2.0, 2.0));
    Tensor logits = uniform_tensor({4, 5}, rng, -2.0, 2.0);
    auto kl = kl_divergence(p, softmax(logits));
    out.push_back(grad_check("kl", [&] { return kl_divergence(p, softmax(logits)).value; }, {&logits}, {kl.grad}));
  }
  {
    ClassifierSpec spec;
    spec.input_dim = 5;
    spec.hidden = {7, 4};
    spec.num_classes = 3;
    auto init = make_rng(8, StreamTag::kModelInit);
    Classifier model = Classifier::create(spec, init);
    for (Tensor* p : model.parameters()) {
      if (p->rank() == 1) *p = uniform_tensor(p->shape(), rng, 0.05, 0.3);
    }
    const Tensor x = uniform_tensor({6, 5}, rng);
    const std::vector<int> y{2, 0, 1, 1, 0, 2};
    auto pass = model.forward(x);
    auto grads = model.backward(pass, cross_entropy_with_logits(pass.logits, y).grad);
    out.push_back(grad_check("classifier", [&] { return cross_entropy_with_logits(model.logits(x), y).value; },
                             model.parameters(), grads));

    Tensor z = uniform_tensor({6, 4}, rng);
    auto lp = model.forward_latent(z);
    Tensor dz;
    auto pg = model.backward_latent(lp, cross_entropy_with_logits(lp.logits, y).grad, &dz);
    out.push_back(grad_check("predictor-latent",
                             [&] { return cross_entropy_with_logits(model.predict_from_latent(z), y).value; },
                             {&model.predictor().weights, &model.predictor().bias, &z}, {pg[0], pg[1], dz}));
  }
  {
    GeneratorSpec gspec;
    gspec.noise_dim = 3;
    gspec.hidden_dim = 6;
    gspec.output_dim = 4;
    gspec.num_classes = 3;
    auto init = make_rng(9, StreamTag::kGenerator);
    Generator gen = Generator::create(gspec, init);
    const std::vector<int> y{0, 2, 1, 2};
    const Tensor eps = uniform_tensor({4, 3}, rng);
    const Tensor up = uniform_tensor({4, 4}, rng);
    auto pass = gen.forward(y, eps);
    auto grads = gen.backward(pass, up);
    out.push_back(grad_check("generator", [&] { return dot(gen.forward(y, eps).z, up); }, gen.parameters(), grads));

    Tensor z = uniform_tensor({6, 4}, rng);
    const Tensor e = uniform_tensor({6, 3}, rng);
    const std::vector<int> labels{0, 1, 0, 1, 0, 2};
    auto div = diversity_loss(z, e, labels);
    out.push_back(grad_check("diversity", [&] { return diversity_loss(z, e, labels).value; }, {&z}, {div.grad}));
  }
  return out;
}

std::vector<SelftestCheck> invariant_checks() {
  std::vector<SelftestCheck> out;
  auto rng = make_rng(11, StreamTag::kEval);

  {
    bool ok = true;
    for (int t = 0; t < 20 && ok; ++t) {
      const Tensor p = softmax(uniform_tensor({8, 10}, rng, -50.0, 50.0));
      for (std::size_t r = 0; r < 8; ++r) {
        double s = 0.0;
        for (double v : p.row(r)) s += v;
        ok = ok && std::abs(s - 1.0) <= 1e-12;
      }
    }
    out.push_back({"softmax rows sum to one", ok, ""});
  }
  {
    std::vector<ClientUpdate> ups(3);
    for (std::size_t i = 0; i < 3; ++i) {
      ups[i].client_id = 7 - 3 * i;
      ups[i].payload = {uniform_tensor({3, 2}, rng), uniform_tensor({2}, rng)};
    }
    const auto a = aggregate(ups);
    std::swap(ups[0], ups[2]);
    const auto b = aggregate(ups);
    out.push_back({"aggregate permutation invariance", a[0].identical(b[0]) && a[1].identical(b[1]), ""});
  }
  {
    std::vector<int> labels;
    for (int c = 0; c < 10; ++c) labels.insert(labels.end(), 30, c);
    bool ok = true;
    for (std::uint64_t s = 0; s < 50 && ok; ++s) {
      try {
        auto part = dirichlet_partition(labels, 10, 1 + s % 12, s % 2 ? 0.1 : 5.0, s);
        check_partition(part, labels.size());
        ok = part.total() == labels.size();
      } catch (const ContractError&) {
        // an unsatisfiable draw is reported, not a violation
      }
    }
    out.push_back({"partition disjoint and covering", ok, ""});
  }
  {
    const std::vector<Tensor> ts{uniform_tensor({4, 3}, rng), Tensor::vector({-0.0, 1e-310, 3.5})};
    const auto back = decode_tensors(encode_tensors(ts));
    out.push_back({"checkpoint blob bit-exact", back.size() == 2 && back[0].identical(ts[0]) && back[1].identical(ts[1]),
                   ""});
  }
  {
    ExperimentConfig cfg;
    cfg.dataset = DatasetKind::kPrototype;
    cfg.prototype.samples_per_cluster = 60;
    cfg.prototype.test_per_cluster = 40;
    cfg.alpha = 1.0;
    cfg.hidden_layers = {8, 4};
    cfg.round.num_users = 4;
    cfg.round.active_users = 2;
    cfg.round.local_steps = 3;
    cfg.round.rounds = 2;
    cfg.round.generator_steps = 3;
    cfg.round.generator_batch = 16;
    cfg.round.synthetic_batch = 8;
    auto run_once = [&] {
      Federation fed = make_federation(cfg, prepare_data(cfg));
      std::vector<Tensor> trace;
      for (std::size_t r = 0; r < cfg.round.rounds; ++r) {
        (void)step_round(fed);
        for (auto& t : fed.server.model.tensors()) trace.push_back(std::move(t));
      }
      return trace;
    };
    const auto a = run_once();
    const auto b = run_once();
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i) same = a[i].identical(b[i]);
    out.push_back({"fedgen rerun bitwise identical", same, ""});
  }
  return out;
}

}  // namespace

std::vector<SelftestCheck> run_selftest(std::ostream& os) {
  std::vector<SelftestCheck> all;
  for (auto& c : gradient_checks()) all.push_back(std::move(c));
  for (auto& c : invariant_checks()) all.push_back(std::move(c));
  for (const auto& c : all) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) os << " (" << c.detail << ")";
    os << '\n';
  }
  return all;
}

}  // namespace fedkd
