/*
 * Copyright 2026 The urbancfx Authors.
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

#include <random>

#include "test_support.hpp"

namespace urbancfx {
namespace {

TrainConfig exact_config() {
  TrainConfig c;
  c.subsample = 1.0;
  c.colsample = 1.0;
  return c;
}

std::pair<Matrix, std::vector<double>> friedman(std::size_t n, std::uint64_t seed) {
  Matrix x = testing::random_matrix(n, 5, seed);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = 10 * std::sin(std::numbers::pi * x(i, 0) * x(i, 1)) + 20 * (x(i, 2) - 0.5) * (x(i, 2) - 0.5) +
           10 * x(i, 3) + 5 * x(i, 4);
  return {x, y};
}

TEST(Gbdt, ConstantTargetGivesBaseOnlyModel) {
  const Matrix x = testing::random_matrix(30, 3, 1);
  const std::vector<double> y(30, 42.0);
  const auto m = train_gbdt(x, y, TrainConfig{}, TaskMode::kRegression);
  EXPECT_TRUE(m.trees.empty());
  EXPECT_EQ(m.predict(x.row(3)).value, 42.0);
}

TEST(Gbdt, SingleStumpRecoversStepFunction) {
  Matrix x;
  std::vector<double> y;
  for (int i = 0; i < 10; ++i) {
    x.push_row(std::vector<double>{static_cast<double>(i)});
    y.push_back(i < 5 ? 0.0 : 10.0);
  }
  auto cfg = exact_config();
  cfg.n_estimators = 1;
  cfg.learning_rate = 1.0;
  cfg.max_depth = 1;
  const auto m = train_gbdt(x, y, cfg, TaskMode::kRegression);
  ASSERT_EQ(m.trees.size(), 1u);
  const auto& root = m.trees[0].nodes[0];
  EXPECT_EQ(root.feature, 0);
  EXPECT_GT(root.threshold, 4.0);
  EXPECT_LE(root.threshold, 5.0);
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(m.predict(x.row(static_cast<std::size_t>(i))).value, y[static_cast<std::size_t>(i)], 1e-12);
}

TEST(Gbdt, FitsSmoothFunction) {
  const auto [x, y] = friedman(600, 2);
  const auto [xt, yt] = friedman(200, 3);
  auto cfg = TrainConfig{};
  cfg.n_estimators = 200;
  const auto m = train_gbdt(x, y, cfg, TaskMode::kRegression);
  std::vector<double> yhat;
  for (std::size_t i = 0; i < xt.rows(); ++i) yhat.push_back(m.predict(xt.row(i)).value);
  EXPECT_GT(regression_metrics(yt, yhat).r2, 0.85);
}

TEST(Gbdt, TreeCountAndDepth) {
  const auto [x, y] = friedman(200, 4);
  auto cfg = TrainConfig{};
  cfg.n_estimators = 17;
  cfg.max_depth = 3;
  const auto m = train_gbdt(x, y, cfg, TaskMode::kRegression);
  EXPECT_EQ(m.trees.size(), 17u);
  for (const auto& t : m.trees) EXPECT_LE(t.depth(), 3);

  std::vector<double> labels(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) labels[i] = y[i] < 12 ? 0 : (y[i] < 18 ? 1 : 2);
  const auto c = train_gbdt(x, labels, cfg, TaskMode::kMulticlass);
  EXPECT_EQ(c.trees.size(), 3u * 17u);
}

TEST(Gbdt, ProbabilitiesSumToOne) {
  const auto [x, y] = friedman(200, 5);
  std::vector<double> labels(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) labels[i] = y[i] < 14 ? 0 : 1;
  const auto m = train_gbdt(x, labels, TrainConfig{}, TaskMode::kMulticlass);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto p = m.predict(x.row(i));
    EXPECT_NEAR(p.proba[0] + p.proba[1] + p.proba[2], 1.0, 1e-12);
    EXPECT_EQ(p.label, std::max_element(p.proba.begin(), p.proba.end()) - p.proba.begin());
  }
}

TEST(Gbdt, SingleClassIsRejected) {
  const Matrix x = testing::random_matrix(20, 2, 6);
  EXPECT_THROW(train_gbdt(x, std::vector<double>(20, 1.0), TrainConfig{}, TaskMode::kMulticlass), DomainError);
  EXPECT_THROW(train_gbdt(x, std::vector<double>(20, 3.0), TrainConfig{}, TaskMode::kMulticlass), DomainError);
  EXPECT_THROW(train_gbdt(x, std::vector<double>(19, 1.0), TrainConfig{}, TaskMode::kRegression), DomainError);
  EXPECT_THROW(train_gbdt(Matrix(0, 2), std::vector<double>{}, TrainConfig{}, TaskMode::kRegression), DomainError);
}

TEST(Gbdt, DeterministicAndSeedSensitive) {
  const auto [x, y] = friedman(200, 7);
  TrainConfig cfg;
  const auto a = train_gbdt(x, y, cfg, TaskMode::kRegression);
  const auto b = train_gbdt(x, y, cfg, TaskMode::kRegression);
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  cfg.seed = 8;
  EXPECT_NE(train_gbdt(x, y, cfg, TaskMode::kRegression).fingerprint(), a.fingerprint());
}

TEST(Gbdt, JsonRoundTrip) {
  const auto [x, y] = friedman(150, 8);
  const auto m = train_gbdt(x, y, TrainConfig{}, TaskMode::kRegression);
  const auto back = TreeEnsemble::from_json(nlohmann::json::parse(m.to_json().dump()));
  EXPECT_EQ(back.fingerprint(), m.fingerprint());
  for (std::size_t i = 0; i < x.rows(); ++i) EXPECT_EQ(back.predict(x.row(i)).value, m.predict(x.row(i)).value);
  auto j = nlohmann::json::parse(m.to_json().dump());
  j["format_version"] = 99;
  EXPECT_THROW(TreeEnsemble::from_json(j), IoError);
  EXPECT_THROW(TreeEnsemble::from_json(nlohmann::json::parse("{}")), IoError);
}

TEST(Gbdt, OutputRangeBoundsEveryPointInTheBox) {
  const auto [x, y] = friedman(300, 9);
  const auto m = train_gbdt(x, y, TrainConfig{}, TaskMode::kRegression);
  std::vector<double> labels(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) labels[i] = y[i] < 12 ? 0 : (y[i] < 18 ? 1 : 2);
  const auto c = train_gbdt(x, labels, TrainConfig{}, TaskMode::kMulticlass);
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0, 1);
  for (int box = 0; box < 40; ++box) {
    std::vector<double> lo(5), hi(5);
    for (int f = 0; f < 5; ++f) {
      const double a = u(rng), b = u(rng);
      lo[f] = std::min(a, b);
      hi[f] = box % 3 == 0 ? lo[f] : std::max(a, b);
    }
    const auto r = *m.output_range(lo, hi);
    const auto rc = *c.output_range(lo, hi);
    for (int s = 0; s < 50; ++s) {
      std::vector<double> z(5);
      for (int f = 0; f < 5; ++f) z[f] = lo[f] + u(rng) * (hi[f] - lo[f]);
      const double v = m.predict(z).value;
      EXPECT_GE(v, r[0].first - 1e-9);
      EXPECT_LE(v, r[0].second + 1e-9);
      const auto p = c.predict(z);
      for (int k = 0; k < kNumClasses; ++k) {
        EXPECT_GE(p.raw[k], rc[k].first - 1e-9);
        EXPECT_LE(p.raw[k], rc[k].second + 1e-9);
      }
    }
  }
}

TEST(Gbdt, RegressionUsesZeroLeafPenaltyByDefault) {
  TrainConfig c;
  EXPECT_EQ(c.lambda_for(TaskMode::kRegression), 0.0);
  EXPECT_EQ(c.lambda_for(TaskMode::kMulticlass), 1.0);
  c.reg_lambda = 2.5;
  EXPECT_EQ(c.lambda_for(TaskMode::kRegression), 2.5);
}

TEST(Gbdt, PredictChecksWidth) {
  const auto [x, y] = friedman(50, 11);
  const auto m = train_gbdt(x, y, TrainConfig{}, TaskMode::kRegression);
  EXPECT_THROW(m.predict(std::vector<double>(4, 0.0)), DomainError);
}

}  // namespace
}  // namespace urbancfx
