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
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "fedkd/error.hpp"
#include "fedkd/harness/config.hpp"
#include "fedkd/harness/evaluate.hpp"
#include "fedkd/harness/experiment.hpp"
#include "fedkd/harness/matrix.hpp"
#include "fedkd/harness/plot.hpp"
#include "fedkd/harness/prototype_study.hpp"

using namespace fedkd;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("fedkd_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

ExperimentConfig tiny_config(Algorithm algo = Algorithm::kFedGen) {
  ExperimentConfig c;
  c.run_id = "tiny";
  c.dataset = DatasetKind::kPrototype;
  c.prototype.samples_per_cluster = 80;
  c.prototype.test_per_cluster = 60;
  c.alpha = 0.5;
  c.hidden_layers = {12, 8};
  c.generator_noise_dim = 4;
  c.generator_hidden_dim = 16;
  c.round.algorithm = algo;
  c.round.num_users = 5;
  c.round.active_users = 3;
  c.round.local_steps = 4;
  c.round.batch_size = 8;
  c.round.synthetic_batch = 8;
  c.round.learning_rate = 0.05;
  c.round.generator_steps = 3;
  c.round.generator_batch = 16;
  c.round.rounds = 6;
  c.round.seed = 3;
  return c;
}

Classifier linear_model(const std::vector<std::vector<double>>& bias_rows, std::size_t input_dim) {
  ClassifierSpec spec;
  spec.input_dim = input_dim;
  spec.hidden = {2};
  spec.num_classes = static_cast<int>(bias_rows[0].size());
  auto rng = make_rng(1, StreamTag::kModelInit);
  auto m = Classifier::create(spec, rng);
  for (double& v : m.predictor().weights.values()) v = 0.0;
  for (std::size_t c = 0; c < bias_rows[0].size(); ++c) m.predictor().bias[c] = bias_rows[0][c];
  return m;
}

}  // namespace

TEST_CASE("accuracy: perfect, tie rule, chance level") {
  Tensor scores = Tensor::matrix({{0.1, 0.9}, {0.8, 0.2}, {0.5, 0.5}});
  CHECK(accuracy(scores, std::vector<int>{1, 0, 0}) == 1.0);
  CHECK(accuracy(scores, std::vector<int>{1, 0, 1}) == doctest::Approx(2.0 / 3.0));

  // A constant classifier on a balanced 4-class set scores the class-0 share.
  Dataset d;
  d.num_classes = 4;
  d.features = Tensor({40, 3}, 0.25);
  for (int i = 0; i < 40; ++i) d.labels.push_back(i % 4);
  auto uniform = linear_model({{0.0, 0.0, 0.0, 0.0}}, 3);
  CHECK(evaluate(uniform, d) == 0.25);
  std::vector<const Classifier*> ens{&uniform, &uniform};
  CHECK(evaluate_ensemble(ens, d) == 0.25);
}

TEST_CASE("experiment config round-trips through JSON") {
  auto c = tiny_config();
  c.round.prior_mode = PriorMode::kCumulative;
  c.round.distill_space = DistillSpace::kInput;
  c.hidden_activation = "leaky_relu:0.1";
  auto j = to_json(c);
  auto back = config_from_json(j);
  CHECK(to_json(back) == j);

  CHECK(to_json(config_from_json(nlohmann::json::object())) == to_json(ExperimentConfig{}));

  auto unknown = j;
  unknown["learning_rat"] = 0.1;
  CHECK_THROWS_AS(config_from_json(unknown), ConfigError);
  auto wrong_type = j;
  wrong_type["rounds"] = "ten";
  CHECK_THROWS_AS(config_from_json(wrong_type), ConfigError);
  auto bad_alg = j;
  bad_alg["algorithm"] = "fedsgd";
  CHECK_THROWS_AS(config_from_json(bad_alg), ConfigError);
  auto bad_range = j;
  bad_range["active_users"] = 50;
  CHECK_THROWS_AS(config_from_json(bad_range), ConfigError);
}

TEST_CASE("rounds.csv schema, cadence and reproducibility") {
  auto cfg = tiny_config();
  cfg.eval_every = 2;
  auto dir = scratch("run_a");
  auto res = run_experiment(cfg, dir);
  auto rows = lines_of(dir / "rounds.csv");
  REQUIRE(rows.size() == 1 + 6 / 2);
  CHECK(rows[0] == kRoundsCsvHeader);
  const std::regex row_re(R"(^\d+,fedgen,0\.5,3,[01]\.\d{6},\d+\.\d{6},[-0-9.e]+,\d+,\d+,$)");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::regex_match(rows[i], row_re));
  CHECK(rows[1].rfind("2,", 0) == 0);
  CHECK(res.records.size() == 3);
  for (const auto& r : res.records) {
    CHECK(r.test_acc >= 0.0);
    CHECK(r.test_acc <= 1.0);
  }
  for (const char* f : {"config.json", "final.json", "timing.csv", "checkpoints/final.bin", "checkpoints/final.json"}) {
    CHECK(fs::exists(dir / f));
  }

  // Same config again, then the embedded config.json fed back in.
  auto dir_b = scratch("run_b");
  run_experiment(cfg, dir_b);
  CHECK(slurp(dir / "rounds.csv") == slurp(dir_b / "rounds.csv"));
  auto dir_c = scratch("run_c");
  run_experiment(load_config(dir / "config.json"), dir_c);
  CHECK(slurp(dir / "rounds.csv") == slurp(dir_c / "rounds.csv"));
  CHECK(slurp(dir / "checkpoints/final.bin") == slurp(dir_c / "checkpoints/final.bin"));
}

TEST_CASE("csv columns per algorithm and sharing mode") {
  auto avg = tiny_config(Algorithm::kFedAvg);
  avg.round.rounds = 2;
  auto dir = scratch("fedavg");
  run_experiment(avg, dir);
  auto rows = lines_of(dir / "rounds.csv");
  REQUIRE(rows.size() == 3);
  // Empty generator loss and empty wall time.
  CHECK(std::regex_match(rows[1], std::regex(R"(^1,fedavg,0\.5,3,[0-9.]+,[0-9.]+,,\d+,\d+,$)")));

  RoundRecord r;
  r.round = 7;
  r.algorithm = "fedgen-partial";
  r.alpha = 0.1;
  r.seed = 2;
  r.test_acc = 0.5;
  r.train_loss = 1.25;
  r.gen_loss = 0.75;
  r.bytes_up = 10;
  r.bytes_down = 20;
  CHECK(format_record(r) == "7,fedgen-partial,0.1,2,0.500000,1.250000,0.750000,10,20,");
}

TEST_CASE("predictor-only runs move fewer bytes every round") {
  auto full = tiny_config(Algorithm::kFedGen);
  auto part = full;
  part.round.sharing = SharingMode::kPredictorOnly;
  auto rf = run_experiment(full, scratch("bytes_full"));
  auto rp = run_experiment(part, scratch("bytes_part"));
  REQUIRE(rf.records.size() == rp.records.size());
  for (std::size_t i = 0; i < rf.records.size(); ++i) {
    CHECK(rp.records[i].bytes_up < rf.records[i].bytes_up);
    CHECK(rp.records[i].bytes_down < rf.records[i].bytes_down);
  }
  CHECK(rp.records[0].algorithm == "fedgen-partial");
}

TEST_CASE("fedgen runs record the generator objective") {
  auto cfg = tiny_config(Algorithm::kFedGen);
  cfg.round.rounds = 1;
  cfg.round.diversity_weight = 0.25;
  auto dir = scratch("gen_meta");
  run_experiment(cfg, dir);
  for (const char* f : {"final.json", "checkpoints/final.json"}) {
    CAPTURE(f);
    const auto j = nlohmann::json::parse(slurp(dir / f));
    REQUIRE(j.contains("generator"));
    CHECK(j["generator"]["diversity_weight"].get<double>() == 0.25);
    CHECK(j["generator"]["diversity_loss"].get<std::string>().find("same-label pairs") != std::string::npos);
  }
  auto avg = tiny_config(Algorithm::kFedAvg);
  avg.round.rounds = 1;
  const auto avg_dir = scratch("avg_meta");
  run_experiment(avg, avg_dir);
  CHECK_FALSE(nlohmann::json::parse(slurp(avg_dir / "final.json")).contains("generator"));
}

TEST_CASE("every algorithm completes a short run") {
  for (auto algo : {Algorithm::kFedAvg, Algorithm::kFedProx, Algorithm::kFedEnsemble, Algorithm::kFedDistill,
                    Algorithm::kFedDistillPlus, Algorithm::kFedDFusion, Algorithm::kFedGen}) {
    CAPTURE(algorithm_name(algo));
    auto cfg = tiny_config(algo);
    cfg.round.rounds = 2;
    if (algo == Algorithm::kFedDFusion) cfg.proxy_fraction = 0.1;
    auto res = run_experiment(cfg, scratch(std::string("algo_") + std::string(algorithm_name(algo))));
    CHECK(res.records.size() == 2);
    CHECK(res.total_bytes_up > 0);
  }
  auto no_proxy = tiny_config(Algorithm::kFedDFusion);
  CHECK_THROWS_AS(run_experiment(no_proxy, scratch("no_proxy")), ConfigError);
}

TEST_CASE("prepare_data keeps the proxy apart from the clients") {
  auto cfg = tiny_config(Algorithm::kFedDFusion);
  cfg.proxy_fraction = 0.2;
  auto data = prepare_data(cfg);
  std::size_t client_rows = 0;
  for (const auto& c : data.clients) client_rows += c.size();
  CHECK(data.proxy.rows() + client_rows == 3 * 80);
  CHECK(data.proxy.rows() == 48);
  CHECK(data.clients.size() == 5);
}

TEST_CASE("mean_std and cell formatting") {
  std::vector<double> three{0.90, 0.91, 0.92};
  auto s = mean_std(three);
  CHECK(s.mean == doctest::Approx(0.91));
  CHECK(s.std == doctest::Approx(0.01));
  std::vector<double> one{0.5};
  CHECK(mean_std(one).std == 0.0);
  CHECK(format_cell(93.03, 0.32) == "93.03±0.32");
  CHECK(format_cell(100 * s.mean, 100 * s.std) == "91.00±1.00");
}

TEST_CASE("run_matrix summarizes seeds and marks failing cells") {
  auto dir = scratch("matrix");
  auto good = tiny_config(Algorithm::kFedAvg);
  good.run_id = "good";
  good.round.rounds = 2;
  std::ofstream(dir / "good.json") << to_json(good).dump(2);
  std::ofstream(dir / "bad.json") << R"({"run_id": "bad", "dataset": "idx", "train_images": "/nonexistent"})";

  std::vector<fs::path> configs{dir / "good.json", dir / "bad.json"};
  std::vector<std::uint64_t> seeds{1, 2};
  auto cells = run_matrix(configs, seeds, dir / "out");
  REQUIRE(cells.size() == 2);
  CHECK_FALSE(cells[0].failed);
  CHECK(cells[0].final_acc.size() == 2);
  CHECK(fs::exists(dir / "out" / "good" / "seed_2" / "rounds.csv"));
  CHECK(cells[1].failed);
  CHECK_FALSE(cells[1].error.empty());

  write_matrix(cells, dir / "out");
  auto csv = lines_of(dir / "out" / "matrix.csv");
  CHECK(csv.size() == 3);
  auto text = format_matrix_text(cells);
  CHECK(text.find("failed") != std::string::npos);

  std::vector<std::uint64_t> single{4};
  auto solo = run_matrix(std::span<const fs::path>(configs.data(), 1), single, dir / "solo");
  CHECK(solo[0].stats.std == 0.0);

  auto globbed = expand_glob((dir / "*.json").string());
  CHECK(globbed == std::vector<fs::path>{dir / "bad.json", dir / "good.json"});
}

TEST_CASE("plots: one series per file, bounded, deterministic") {
  auto dir = scratch("plots");
  std::vector<fs::path> csvs;
  for (auto algo : {Algorithm::kFedAvg, Algorithm::kFedGen, Algorithm::kFedGen}) {
    auto cfg = tiny_config(algo);
    cfg.round.rounds = 4;
    auto run_dir = dir / ("run" + std::to_string(csvs.size()));
    run_experiment(cfg, run_dir);
    csvs.push_back(run_dir / "rounds.csv");
  }
  std::ofstream(dir / "empty.csv") << kRoundsCsvHeader << "\n";
  csvs.push_back(dir / "empty.csv");

  std::ostringstream warn;
  auto written = emit_plots(csvs, dir / "svg", &warn);
  CHECK(written.size() == 3);
  CHECK(warn.str().find("empty.csv") != std::string::npos);

  const auto svg = slurp(dir / "svg" / "accuracy.svg");
  const std::regex poly(R"re(points="([^"]*)")re");
  int series = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), poly); it != std::sregex_iterator(); ++it) {
    ++series;
    std::stringstream pts((*it)[1].str());
    std::string pair;
    while (pts >> pair) {
      const double x = std::stod(pair.substr(0, pair.find(',')));
      const double y = std::stod(pair.substr(pair.find(',') + 1));
      CHECK(x >= 70.0 - 1e-9);
      CHECK(x <= 550.0 + 1e-9);
      CHECK(y >= 40.0 - 1e-9);
      CHECK(y <= 390.0 + 1e-9);
    }
  }
  CHECK(series == 3);
  CHECK(svg.find("fedgen #2") != std::string::npos);
  CHECK(slurp(dir / "svg" / "gen_loss.svg").find("fedavg") == std::string::npos);

  emit_plots(csvs, dir / "svg2");
  for (const char* f : {"accuracy.svg", "train_loss.svg", "gen_loss.svg"}) {
    CHECK(slurp(dir / "svg" / f) == slurp(dir / "svg2" / f));
  }

  std::ofstream(dir / "junk.csv") << "a,b,c\n1,2,3\n";
  CHECK_THROWS_AS(read_rounds_csv(dir / "junk.csv"), ParseError);
}

TEST_CASE("prototype study: oracle quality and synthetic CE drop per user") {
  auto r = run_prototype_study(1);
  CHECK(r.oracle >= 0.97);
  for (int k = 0; k < 3; ++k) {
    CAPTURE(k);
    CHECK(r.synthetic_ce_after[static_cast<std::size_t>(k)] < r.synthetic_ce_before[static_cast<std::size_t>(k)]);
  }
  CHECK(r.seconds < 60.0);
}
