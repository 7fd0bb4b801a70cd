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

#include <set>

#include "test_support.hpp"

namespace urbancfx {
namespace {

const TreeEnsemble& svf_gbdt() {
  static const TreeEnsemble m = train_gbdt(testing::small_world().train, TrainConfig{}, TaskMode::kRegression);
  return m;
}

const TreeEnsemble& class_gbdt() {
  static const TreeEnsemble m = train_gbdt(testing::small_world().train, TrainConfig{}, TaskMode::kMulticlass);
  return m;
}

// Checks validity, actionability and per-coordinate minimality of a result.
void check_strategies(const Model& model, std::span<const double> x, const TargetSpec& target,
                      const CandidateIndex& idx, const CounterfactualResult& res) {
  const Goal goal(target, res.baseline);
  std::set<std::vector<std::size_t>> sets;
  double prev = -1;
  for (const auto& s : res.strategies) {
    EXPECT_TRUE(goal.satisfied(model.predict(s.point)));
    EXPECT_GE(s.cost, prev);
    prev = s.cost;
    EXPECT_TRUE(sets.insert(s.changed_features()).second) << "duplicate changed-feature set";
    EXPECT_NEAR(s.cost, strategy_cost(x, s.point, idx.domains, 0.05), 1e-12);
    for (std::size_t f = 0; f < kHeightBase; ++f) EXPECT_EQ(s.point[f], x[f]);
    for (int d = 0; d < kNumDirections; ++d)
      if (x[height_index(d)] == 0) {
        EXPECT_EQ(s.point[height_index(d)], 0);
        EXPECT_EQ(s.point[distance_index(d)], x[distance_index(d)]);
      }
    for (auto [f, delta] : s.deltas) {
      ASSERT_TRUE(idx.domains[f].actionable);
      EXPECT_TRUE(idx.domains[f].admits(s.point[f]));
      auto back = s.point;
      const double step = idx.domains[f].step;
      back[f] = std::abs(delta) <= step ? x[f] : s.point[f] - std::copysign(step, delta);
      EXPECT_FALSE(goal.satisfied(model.predict(back))) << "feature " << f << " can move back toward x";
    }
  }
}

TEST(Target, Parse) {
  EXPECT_EQ(TargetSpec::parse("svf+9").delta, 9);
  EXPECT_EQ(TargetSpec::parse("svf").delta, 5);
  const auto c = TargetSpec::parse("class+1", 1);
  EXPECT_EQ(c.kind, TargetSpec::Kind::kClassPromotion);
  EXPECT_EQ(c.to, 2);
  EXPECT_EQ(c.str(), "class1->2");
  EXPECT_THROW(TargetSpec::parse("height+2"), ConfigError);
  EXPECT_THROW(TargetSpec::parse("svf+-1"), DomainError);
  EXPECT_THROW(TargetSpec::parse("class+1", 2), DomainError);
}

TEST(Domains, FrozenContextAndAbsentSectors) {
  UrbanScenario s;
  s.building_width = 10;
  s.building_length = 12;
  s.park_area = 400;
  s.heights = {5, 0, 4, 4, 4, 4, 4, 4};
  for (int d = 0; d < kNumDirections; ++d)
    if (s.heights[d]) s.distances[d] = 10;
  const auto x = s.features();
  const auto dom = make_domains(x, ActionabilityMask::standard(), LatticeConfig{});
  for (std::size_t f = 0; f < kHeightBase; ++f) EXPECT_FALSE(dom[f].actionable);
  EXPECT_FALSE(dom[height_index(1)].actionable);
  EXPECT_FALSE(dom[distance_index(1)].actionable);
  EXPECT_TRUE(dom[height_index(0)].actionable);
  EXPECT_EQ(dom[height_index(0)].lo, 3);
  EXPECT_EQ(dom[height_index(0)].hi, 10);
  EXPECT_EQ(dom[distance_index(0)].lo, 3);  // half the street width
  EXPECT_EQ(dom[distance_index(0)].hi, kAbsentDistance);
  EXPECT_EQ(dom[distance_index(0)].lattice.size(), 14u);  // 4..30, clipped below at 3
  const auto rem = make_domains(x, ActionabilityMask::standard(true), LatticeConfig{});
  EXPECT_EQ(rem[height_index(0)].lo, 0);
  EXPECT_EQ(rem[height_index(0)].lattice.front(), 0);
}

TEST(Cost, SparseL1ByHand) {
  UrbanScenario s;
  s.building_width = s.building_length = 10;
  s.park_area = 400;
  s.heights.fill(5);
  for (auto& d : s.distances) d = 10;
  const auto x = s.features();
  const auto dom = make_domains(x, ActionabilityMask::standard(), LatticeConfig{});
  auto z = x;
  z[height_index(2)] = 7;     // 2 / 7
  z[distance_index(4)] = 14;  // 4 / 97
  EXPECT_NEAR(strategy_cost(x, z, dom, 0.05), 2.0 / 7 + 4.0 / 97 + 0.1, 1e-12);
  EXPECT_EQ(strategy_cost(x, x, dom, 0.05), 0.0);
}

TEST(Counterfactual, StrategiesAreValidSparseAndMinimal) {
  const auto& w = testing::small_world();
  int checked = 0;
  for (std::size_t i = 0; i < 12; ++i) {
    const auto x = w.test.rows[i].scenario.features();
    const auto idx = build_candidate_index(w.train, x);
    try {
      const auto res = find_counterfactuals(svf_gbdt(), x, TargetSpec::svf_increase(5), idx);
      ASSERT_FALSE(res.strategies.empty());
      EXPECT_LE(res.strategies.size(), 5u);
      EXPECT_GE(res.evaluations, res.strategies.size());
      check_strategies(svf_gbdt(), x, TargetSpec::svf_increase(5), idx, res);
      ++checked;
    } catch (const DomainError&) {
    }
  }
  EXPECT_GE(checked, 6);
}

TEST(Counterfactual, LinearModelStrategies) {
  const auto model = testing::synthetic_svf_model();
  const auto& w = testing::small_world();
  const auto x = w.test.rows[0].scenario.features();
  const auto idx = build_candidate_index(w.train, x);
  const auto res = find_counterfactuals(model, x, TargetSpec::svf_increase(3), idx);
  EXPECT_EQ(res.strategies.size(), 5u);
  check_strategies(model, x, TargetSpec::svf_increase(3), idx, res);
}

TEST(Counterfactual, TopStrategyMatchesExhaustiveSearch) {
  const auto& w = testing::small_world();
  LatticeConfig lat;
  lat.distance_radius = 3;
  int checked = 0;
  for (std::size_t i = 0; i < 15; ++i) {
    const auto x = w.test.rows[i].scenario.features();
    const auto idx = build_candidate_index(Dataset{}, x, ActionabilityMask::standard(), lat);
    EXPECT_EQ(idx.from_dataset, 0u);
    ASSERT_LE(idx.points.rows(), 10000u);
    CounterfactualConfig cfg;
    cfg.lattice = lat;
    const TargetSpec target = TargetSpec::svf_increase(4);
    const Goal goal(target, svf_gbdt().predict(x));
    const auto brute = brute_force_min_cost(svf_gbdt(), x, goal, idx, cfg.lambda);
    if (!brute) {
      EXPECT_THROW(find_counterfactuals(svf_gbdt(), x, target, idx, cfg), DomainError);
      continue;
    }
    const auto res = find_counterfactuals(svf_gbdt(), x, target, idx, cfg);
    EXPECT_NEAR(res.strategies.front().cost, brute->second, 1e-12) << "row " << i;
    ++checked;
  }
  EXPECT_GE(checked, 5);
}

TEST(Counterfactual, ScreeningNeverChangesTheAnswer) {
  // A model without output bounds explores the same pool unscreened.
  class Unbounded : public Model {
   public:
    explicit Unbounded(const Model& m) : m_(m) {}
    TaskMode mode() const override { return m_.mode(); }
    std::size_t num_features() const override { return m_.num_features(); }
    Prediction predict(std::span<const double> x) const override { return m_.predict(x); }
    std::string fingerprint() const override { return m_.fingerprint(); }

   private:
    const Model& m_;
  };
  const auto& w = testing::small_world();
  for (std::size_t i = 0; i < 6; ++i) {
    const auto x = w.test.rows[i].scenario.features();
    const auto idx = build_candidate_index(w.train, x);
    try {
      const auto a = find_counterfactuals(svf_gbdt(), x, TargetSpec::svf_increase(5), idx);
      const auto b = find_counterfactuals(Unbounded(svf_gbdt()), x, TargetSpec::svf_increase(5), idx);
      ASSERT_EQ(a.strategies.size(), b.strategies.size());
      for (std::size_t k = 0; k < a.strategies.size(); ++k) EXPECT_EQ(a.strategies[k].point, b.strategies[k].point);
      EXPECT_LE(a.evaluations, b.evaluations);
      EXPECT_EQ(b.screened, 0u);
    } catch (const DomainError&) {
    }
  }
}

TEST(Counterfactual, ClassPromotion) {
  const auto& w = testing::small_world();
  int checked = 0;
  for (const auto& row : w.test.rows) {
    const auto x = row.scenario.features();
    const auto base = class_gbdt().predict(x);
    if (base.label != 0) continue;
    const auto target = TargetSpec::class_promotion(0);
    const auto idx = build_candidate_index(w.train, x);
    try {
      const auto res = find_counterfactuals(class_gbdt(), x, target, idx);
      for (const auto& s : res.strategies) EXPECT_GE(class_gbdt().predict(s.point).label, 1);
      check_strategies(class_gbdt(), x, target, idx, res);
      ++checked;
    } catch (const DomainError&) {
    }
    if (checked == 3) break;
  }
  EXPECT_GE(checked, 1);
}

TEST(Counterfactual, AlreadySatisfiedReturnsTheQuery) {
  const auto& w = testing::small_world();
  for (const auto& row : w.test.rows) {
    const auto x = row.scenario.features();
    if (class_gbdt().predict(x).label != 1) continue;
    const auto res = find_counterfactuals(class_gbdt(), x, TargetSpec::class_promotion(0),
                                          build_candidate_index(w.train, x));
    EXPECT_TRUE(res.already_satisfied);
    ASSERT_EQ(res.strategies.size(), 1u);
    EXPECT_TRUE(res.strategies[0].deltas.empty());
    EXPECT_EQ(res.strategies[0].cost, 0.0);
    return;
  }
  GTEST_SKIP() << "no test row predicted in class 1";
}

TEST(Counterfactual, UnreachableAndMismatchedTargets) {
  const auto& w = testing::small_world();
  const auto x = w.test.rows[0].scenario.features();
  const auto idx = build_candidate_index(w.train, x);
  EXPECT_THROW(find_counterfactuals(svf_gbdt(), x, TargetSpec::svf_increase(500), idx), DomainError);
  EXPECT_THROW(find_counterfactuals(svf_gbdt(), x, TargetSpec::class_promotion(0), idx), DomainError);
  EXPECT_THROW(find_counterfactuals(class_gbdt(), x, TargetSpec::svf_increase(5), idx), DomainError);
  CounterfactualConfig bad;
  bad.k = 0;
  EXPECT_THROW(find_counterfactuals(svf_gbdt(), x, TargetSpec::svf_increase(5), idx, bad), ConfigError);
}

TEST(Counterfactual, PoolRespectsContextAndSparsity) {
  const auto& w = testing::small_world();
  const auto x = w.test.rows[1].scenario.features();
  LatticeConfig lat;
  lat.min_pool = 1000000;
  const auto idx = build_candidate_index(w.train, x, ActionabilityMask::standard(), lat);
  EXPECT_GT(idx.synthetic, 0u);
  for (std::size_t r = 0; r < idx.points.rows(); ++r) {
    const auto z = idx.points.row(r);
    for (std::size_t f = 0; f < kHeightBase; ++f) ASSERT_EQ(z[f], x[f]);
    if (r < idx.from_dataset) continue;
    int changed = 0;
    for (std::size_t f = 0; f < kNumFeatures; ++f) changed += z[f] != x[f];
    EXPECT_LE(changed, lat.max_changed);
  }
}

TEST(DiffTable, RoundTripsDeltas) {
  const auto& w = testing::small_world();
  const auto model = testing::synthetic_svf_model();
  const auto x = w.test.rows[2].scenario.features();
  const auto target = TargetSpec::svf_increase(3);
  const auto res = find_counterfactuals(model, x, target, build_candidate_index(w.train, x));
  const auto table = strategy_diff_table(x, res.strategies, target, res.baseline);
  EXPECT_EQ(table.header.size(), 2 + res.strategies.size());
  EXPECT_EQ(table.rows.size(), 17u);
  EXPECT_EQ(table.rows.back()[0], "SVF");
  const auto parsed = parse_strategy_deltas(table);
  ASSERT_EQ(parsed.size(), res.strategies.size());
  for (std::size_t s = 0; s < parsed.size(); ++s) EXPECT_EQ(parsed[s], res.strategies[s].deltas);
}

TEST(CountingModel, CountsDistinctPoints) {
  const auto model = testing::synthetic_svf_model();
  CountingModel c(model);
  std::vector<double> a(kNumFeatures, 1.0), b(kNumFeatures, 2.0);
  c.predict(a);
  c.predict(a);
  c.predict(b);
  EXPECT_EQ(c.evaluations(), 2u);
}

}  // namespace
}  // namespace urbancfx
