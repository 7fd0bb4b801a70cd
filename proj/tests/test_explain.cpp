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

#include "test_support.hpp"

namespace urbancfx {
namespace {

double nonlinear(std::span<const double> z) {
  return z[0] * z[1] + std::sin(3 * z[2]) + z[3] * z[3] * z[0] - 2 * z[4] + (z[5] > 0.5 ? 1.0 : 0.0) * z[1];
}

TEST(Shapley, LinearModelClosedForm) {
  const std::vector<double> w = {2, -1, 0.5, 0, 3};
  const ScoreFn f = [&](std::span<const double> z) {
    double s = 1;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * z[i];
    return s;
  };
  const Matrix bg = testing::random_matrix(20, 5, 1);
  const std::vector<double> x = {0.9, 0.1, 0.7, 0.3, 0.2};
  for (const auto& a : {shapley_exact(f, x, bg), shapley_sampled(f, x, bg, 20, 3)}) {
    for (std::size_t j = 0; j < 5; ++j) {
      double mean = 0;
      for (std::size_t r = 0; r < bg.rows(); ++r) mean += bg(r, j);
      mean /= static_cast<double>(bg.rows());
      EXPECT_NEAR(a.phi[j], w[j] * (x[j] - mean), 1e-12) << a.estimator << " feature " << j;
    }
  }
}

TEST(Shapley, EfficiencyHoldsForBothEstimators) {
  const Matrix bg = testing::random_matrix(15, 6, 2);
  const Matrix xs = testing::random_matrix(10, 6, 3);
  for (std::size_t i = 0; i < xs.rows(); ++i) {
    const auto e = shapley_exact(nonlinear, xs.row(i), bg);
    EXPECT_NEAR(e.total(), nonlinear(xs.row(i)), 1e-9);
    const auto s = shapley_sampled(nonlinear, xs.row(i), bg, 30, i);
    EXPECT_NEAR(s.total(), s.fx, 1e-9);
    EXPECT_NEAR(s.base_value, e.base_value, 1e-12);
  }
}

TEST(Shapley, DummyFeaturesGetZero) {
  const ScoreFn f = [](std::span<const double> z) { return z[0] * z[2] + z[2]; };
  const Matrix bg = testing::random_matrix(10, 4, 4);
  const std::vector<double> x = {0.3, 0.8, 0.6, 0.1};
  const auto e = shapley_exact(f, x, bg);
  EXPECT_NEAR(e.phi[1], 0.0, 1e-12);
  EXPECT_NEAR(e.phi[3], 0.0, 1e-12);
  const auto s = shapley_sampled(f, x, bg, 40, 1);
  EXPECT_NEAR(s.phi[1], 0.0, 1e-12);
  EXPECT_NEAR(s.phi[3], 0.0, 1e-12);
}

TEST(Shapley, FeaturesMatchingTheBackgroundAreInactive) {
  Matrix bg(5, 3, 1.0);
  for (std::size_t r = 0; r < 5; ++r) bg(r, 0) = static_cast<double>(r);
  const ScoreFn f = [](std::span<const double> z) { return z[0] + 10 * z[1] * z[2]; };
  const std::vector<double> x = {7, 1, 1};
  const auto e = shapley_exact(f, x, bg, 1);  // only feature 0 is active
  EXPECT_NEAR(e.phi[0], 7 - 2, 1e-12);
  EXPECT_EQ(e.phi[1], 0.0);
  EXPECT_EQ(e.phi[2], 0.0);
}

TEST(Shapley, SymmetricFeaturesShareCredit) {
  const ScoreFn f = [](std::span<const double> z) { return z[0] * z[1] + z[2]; };
  Matrix bg;
  bg.push_row(std::vector<double>{0.2, 0.4, 0});
  bg.push_row(std::vector<double>{0.4, 0.2, 1});
  const std::vector<double> x = {0.9, 0.9, 0.5};
  const auto e = shapley_exact(f, x, bg);
  EXPECT_NEAR(e.phi[0], e.phi[1], 1e-12);
}

TEST(Shapley, SampledConvergesToExact) {
  const Matrix bg = testing::random_matrix(12, 6, 5);
  const std::vector<double> x = {0.8, 0.9, 0.1, 0.7, 0.3, 0.95};
  const auto e = shapley_exact(nonlinear, x, bg);
  const auto s = shapley_sampled(nonlinear, x, bg, 2000, 6);
  double scale = 0;
  for (double v : e.phi) scale = std::max(scale, std::abs(v));
  for (std::size_t j = 0; j < 6; ++j) {
    EXPECT_NEAR(s.phi[j], e.phi[j], 0.02 * scale) << "feature " << j;
    EXPECT_LE(std::abs(s.phi[j] - e.phi[j]), 5 * s.se[j] + 1e-9) << "feature " << j;
  }
}

TEST(Shapley, SampledIsDeterministicPerSeed) {
  const Matrix bg = testing::random_matrix(8, 6, 7);
  const std::vector<double> x = {0.5, 0.1, 0.9, 0.3, 0.2, 0.8};
  EXPECT_EQ(shapley_sampled(nonlinear, x, bg, 50, 1).phi, shapley_sampled(nonlinear, x, bg, 50, 1).phi);
  EXPECT_NE(shapley_sampled(nonlinear, x, bg, 50, 1).phi, shapley_sampled(nonlinear, x, bg, 50, 2).phi);
}

TEST(Shapley, RejectsBadInputs) {
  const std::vector<double> x = {1, 2};
  EXPECT_THROW(shapley_exact(nonlinear, x, Matrix(0, 2)), DomainError);
  EXPECT_THROW(shapley_exact(nonlinear, x, Matrix(3, 4)), DomainError);
  EXPECT_THROW(shapley_sampled(nonlinear, x, Matrix(3, 2), 5, 1), DomainError);
  const Matrix bg = testing::random_matrix(3, 14, 1);
  EXPECT_THROW(shapley_exact([](std::span<const double>) { return 0.0; }, std::vector<double>(14, 5.0), bg),
               DomainError);
}

TEST(Explain, ModelAttributionsCarryFingerprint) {
  const auto model = testing::synthetic_svf_model();
  const auto& w = testing::small_world();
  const Matrix x = w.test.features();
  ExplainConfig cfg;
  cfg.background = 20;
  cfg.instances = 6;
  cfg.n_permutations = 20;
  const auto a = explain_rows(model, x, w.train.features(), cfg, 7, 1);
  ASSERT_EQ(a.size(), 6u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].model_fingerprint, "linear");
    EXPECT_NEAR(a[i].total(), model.predict(x.row(i)).value, 1e-9);
  }
  const auto b = explain_rows(model, x, w.train.features(), cfg, 7, 3);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].phi, b[i].phi);
}

TEST(Explain, AggregationRanksAndRejectsMixedModels) {
  ShapleyAttribution a, b;
  a.phi = {1, -3, 0};
  b.phi = {-1, 1, 0.5};
  a.x = b.x = {0, 0, 0};
  a.model_fingerprint = b.model_fingerprint = "m";
  const auto s = aggregate_importance({a, b});
  EXPECT_EQ(s.mean_abs_phi, (std::vector<double>{1, 2, 0.25}));
  EXPECT_EQ(s.ranking(), (std::vector<std::size_t>{1, 0, 2}));
  EXPECT_EQ(s.beeswarm.front().feature, 1u);
  b.model_fingerprint = "other";
  EXPECT_THROW(aggregate_importance({a, b}), DomainError);
  EXPECT_THROW(aggregate_importance({}), DomainError);
}

TEST(Explain, CircularTableHasSixteenRows) {
  const auto model = testing::synthetic_svf_model();
  const auto& w = testing::small_world();
  const Matrix bg = background_sample(w.train.features(), 10, 1);
  std::vector<ShapleyAttribution> attrs;
  for (std::size_t i = 0; i < 3; ++i) attrs.push_back(shapley_sampled(model, w.test.features().row(i), bg, 20, i));
  const auto s = aggregate_importance(attrs);
  const auto text = circular_to_csv(s);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 17);
  EXPECT_NE(text.find("height,N,hN,"), std::string::npos);
  EXPECT_NE(text.find("distance,NW,dNW,"), std::string::npos);
}

TEST(Explain, BackgroundSampleIsSubsetWithoutReplacement) {
  const Matrix x = testing::random_matrix(30, 2, 9);
  const Matrix bg = background_sample(x, 10, 3);
  EXPECT_EQ(bg.rows(), 10u);
  EXPECT_EQ(background_sample(x, 100, 3).rows(), 30u);
  EXPECT_EQ(background_sample(x, 10, 3).data(), bg.data());
}

}  // namespace
}  // namespace urbancfx
