/*
 * Copyright 2026 The Doris Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <random>

#include "doris/gbt.hpp"
#include "oracles.hpp"

using namespace doris;

namespace {

struct Fixture {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
};

// Noisy logistic data over d features; feature 0 carries most of the signal.
Fixture noisy(std::uint64_t seed, std::size_t n, std::size_t d, double prevalence_shift = 0.0) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Fixture f;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (auto& v : x) v = std::round(z(g) * 8) / 8;  // coarse grid: plenty of ties
    const double logit = 1.5 * x[0] - 0.7 * x[1 % d] + prevalence_shift;
    f.rows.push_back(x);
    f.labels.push_back(u(g) < 1.0 / (1.0 + std::exp(-logit)) ? 1 : 0);
  }
  return f;
}

double accuracy(const BoostedModel& m, const Fixture& f) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < f.rows.size(); ++i) ok += m.predict_label(f.rows[i]) == f.labels[i];
  return static_cast<double>(ok) / static_cast<double>(f.rows.size());
}

}  // namespace

TEST(Gbt, BaseScoreMinimizesConstantLoss) {
  std::vector<std::vector<double>> rows(40, std::vector<double>{0.0});
  std::vector<int> labels(40, 0);
  for (int i = 0; i < 10; ++i) labels[i] = 1;
  GbtParams p;
  p.n_trees = 0;
  const auto m = train(rows, labels, p);
  const double c = oracle::golden_min([&](double v) { return oracle::constant_logistic_loss(labels, v); }, -10, 10);
  EXPECT_NEAR(m.base_score(), c, 1e-6);
  EXPECT_NEAR(m.base_score(), std::log(1.0 / 3.0), 1e-12);
}

TEST(Gbt, BaseScoreOnRandomFixtures) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto f = noisy(s, 200, 3, -1.0);
    GbtParams p;
    p.n_trees = 1;
    const auto m = train(f.rows, f.labels, p);
    const double c =
        oracle::golden_min([&](double v) { return oracle::constant_logistic_loss(f.labels, v); }, -10, 10);
    EXPECT_NEAR(m.base_score(), c, 1e-6);
  }
}

TEST(Gbt, LossNonIncreasing) {
  for (std::uint64_t s = 0; s < 8; ++s) {
    const auto f = noisy(100 + s, 300, 4);
    for (double lr : {0.1, 0.05}) {
      GbtParams p;
      p.n_trees = 60;
      p.learning_rate = lr;
      p.max_depth = 3;
      p.min_leaf = 5;
      TrainingTrace trace;
      train(f.rows, f.labels, p, &trace);
      ASSERT_EQ(trace.loss.size(), 61u);
      for (std::size_t t = 1; t < trace.loss.size(); ++t) {
        EXPECT_LE(trace.loss[t], trace.loss[t - 1] + 1e-12) << "seed " << s << " iteration " << t;
      }
    }
  }
}

TEST(Gbt, SeparableStumps) {
  Fixture f;
  for (int i = 0; i < 50; ++i) {
    const double x = i / 50.0;
    f.rows.push_back({x});
    f.labels.push_back(x > 0.5 ? 1 : 0);
  }
  GbtParams p;
  p.n_trees = 10;
  p.max_depth = 1;
  p.min_leaf = 1;
  const auto m = train(f.rows, f.labels, p);
  EXPECT_EQ(accuracy(m, f), 1.0);
}

TEST(Gbt, DeterministicAcrossThreadCounts) {
  const auto f = noisy(7, 400, 12);
  GbtParams p;
  p.n_trees = 30;
  p.min_leaf = 5;
  const auto a = model_to_json(train(f.rows, f.labels, p), {}).dump();
  const auto b = model_to_json(train(f.rows, f.labels, p), {}).dump();
  p.threads = 4;
  const auto c = model_to_json(train(f.rows, f.labels, p), {}).dump();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(Gbt, SubsampleIsSeeded) {
  const auto f = noisy(8, 300, 5);
  GbtParams p;
  p.n_trees = 20;
  p.subsample = 0.7;
  p.subsample_seed = 3;
  const auto a = model_to_json(train(f.rows, f.labels, p), {}).dump();
  EXPECT_EQ(a, model_to_json(train(f.rows, f.labels, p), {}).dump());
  p.subsample_seed = 4;
  EXPECT_NE(a, model_to_json(train(f.rows, f.labels, p), {}).dump());
}

TEST(Gbt, ConstantFeatureNeverSplit) {
  auto f = noisy(9, 300, 3);
  for (auto& r : f.rows) r.push_back(42.0);
  GbtParams p;
  p.n_trees = 40;
  p.min_leaf = 5;
  const auto m = train(f.rows, f.labels, p);
  for (const auto& t : m.trees()) {
    for (const auto& node : t.nodes()) EXPECT_NE(node.feature, 3);
  }
  auto x = f.rows[0];
  const double before = m.raw_score(x);
  x[3] = -1e6;
  EXPECT_EQ(m.raw_score(x), before);
}

TEST(Gbt, MinLeafRespected) {
  const auto f = noisy(10, 200, 3);
  GbtParams p;
  p.n_trees = 5;
  p.min_leaf = 30;
  const auto m = train(f.rows, f.labels, p);
  for (const auto& t : m.trees()) {
    std::map<int, int> counts;
    for (const auto& r : f.rows) {
      int node = 0;
      while (!t.nodes()[node].is_leaf()) {
        const auto& nd = t.nodes()[node];
        node = r[nd.feature] < nd.threshold ? nd.left : nd.right;
      }
      ++counts[node];
    }
    for (auto [leaf, c] : counts) EXPECT_GE(c, 30);
  }
}

TEST(Gbt, LearnsSignal) {
  const auto train_set = noisy(11, 1000, 4);
  const auto test_set = noisy(12, 1000, 4);
  GbtParams p;
  p.n_trees = 50;
  p.max_depth = 3;
  const auto m = train(train_set.rows, train_set.labels, p);
  EXPECT_GT(accuracy(m, test_set), 0.7);
}

TEST(Gbt, RejectsBadInput) {
  GbtParams p;
  std::vector<std::vector<double>> rows = {{1.0}, {2.0}};
  EXPECT_THROW(train(rows, std::vector<int>{1, 1}, p), ValidationError);
  EXPECT_THROW(train(rows, std::vector<int>{1}, p), ValidationError);
  rows[1][0] = std::nan("");
  EXPECT_THROW(train(rows, std::vector<int>{1, 0}, p), ValidationError);
  p.learning_rate = 0.0;
  EXPECT_THROW(validate_params(p), ValidationError);
}

TEST(Gbt, SaveLoadRoundTrip) {
  const auto f = noisy(13, 300, 5);
  GbtParams p;
  p.n_trees = 25;
  p.min_leaf = 5;
  const auto m = train(f.rows, f.labels, p);
  const auto cal = IsotonicCalibrator({-1.0, 0.0, 1.0}, {0.1, 0.4, 0.8});
  const auto path = (std::filesystem::temp_directory_path() / "doris_model_test.json").string();
  save_model(m, cal, path);
  const auto loaded = load_model(path);
  EXPECT_EQ(loaded.calibrator, cal);
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_NEAR(loaded.model.raw_score(f.rows[i]), m.raw_score(f.rows[i]), 1e-12);
  }
  EXPECT_EQ(model_to_json(loaded.model, loaded.calibrator).dump(), model_to_json(m, cal).dump());
}

TEST(Gbt, TamperedModelRejected) {
  const auto f = noisy(14, 200, 3);
  GbtParams p;
  p.n_trees = 3;
  const auto j = model_to_json(train(f.rows, f.labels, p), {});

  auto missing = j;
  missing["trees"].erase(missing["trees"].begin());
  EXPECT_THROW(model_from_json(missing), ValidationError);

  auto version = j;
  version["version"] = "2";
  EXPECT_THROW(model_from_json(version), ValidationError);
  version.erase("version");
  EXPECT_THROW(model_from_json(version), ValidationError);

  auto garbage = j;
  garbage["trees"][0]["nodes"] = "oops";
  EXPECT_THROW(model_from_json(garbage), ValidationError);
}
