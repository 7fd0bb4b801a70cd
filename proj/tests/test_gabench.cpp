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

#include <mutex>

#include "test_support.hpp"

namespace urbancfx {
namespace {

std::vector<double> query() {
  UrbanScenario s;
  s.building_width = 10;
  s.building_length = 12;
  s.park_area = 400;
  s.heights = {5, 0, 4, 6, 3, 7, 0, 8};
  for (int d = 0; d < kNumDirections; ++d)
    if (s.heights[d]) s.distances[d] = 8 + d;
  return s.features();
}

Domains domains(std::span<const double> x) {
  return make_domains(x, ActionabilityMask::standard(), LatticeConfig{});
}

double height_sum(std::span<const double> z) {
  double s = 0;
  for (int d = 0; d < kNumDirections; ++d) s += z[height_index(d)];
  return s;
}

TEST(GeneValues, CoverTheDomain) {
  const auto x = query();
  const auto dom = domains(x);
  const auto genes = gene_values(x, dom);
  EXPECT_EQ(genes.size(), 12u);  // 6 occupied sectors x (h, d)
  for (const auto& g : genes) EXPECT_GE(g.size(), 8u);
  EXPECT_EQ(genes[0], (std::vector<double>{3, 4, 5, 6, 7, 8, 9, 10}));
}

TEST(Ga, FindsKnownOptimum) {
  const auto x = query();
  const auto dom = domains(x);
  GAConfig cfg;
  const auto res = run_ga(height_sum, x, dom, cfg, 60.0);
  EXPECT_TRUE(res.target_met);
  EXPECT_EQ(res.best_fitness, 60.0);
  EXPECT_LE(res.generations, 40);
  EXPECT_EQ(res.stop_reason, "target");
}

TEST(Ga, ElitismKeepsBestFitnessMonotone) {
  const auto x = query();
  const auto dom = domains(x);
  const Objective f = [](std::span<const double> z) {
    return -std::abs(height_sum(z) - 41) - 0.01 * std::abs(z[distance_index(0)] - 20);
  };
  const auto res = run_ga(f, x, dom, GAConfig{});
  ASSERT_GE(res.history.size(), 2u);
  for (std::size_t g = 1; g < res.history.size(); ++g) EXPECT_GE(res.history[g], res.history[g - 1]);
  EXPECT_EQ(res.history.back(), res.best_fitness);
  EXPECT_EQ(f(res.best_point), res.best_fitness);
}

TEST(Ga, DeterministicAcrossRunsAndThreads) {
  const auto x = query();
  const auto dom = domains(x);
  const Objective f = [](std::span<const double> z) { return -std::abs(height_sum(z) - 37) + z[distance_index(3)] / 100; };
  GAConfig cfg;
  cfg.max_stagnation = 10;
  const auto a = run_ga(f, x, dom, cfg);
  const auto b = run_ga(f, x, dom, cfg);
  cfg.threads = 3;
  const auto c = run_ga(f, x, dom, cfg);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.best_point, b.best_point);
  EXPECT_EQ(a.history, c.history);
  EXPECT_EQ(a.evaluations, c.evaluations);
}

TEST(Ga, StopsAfterExactStagnationWindow) {
  const auto x = query();
  const auto dom = domains(x);
  GAConfig cfg;
  cfg.max_stagnation = 7;
  const auto res = run_ga([](std::span<const double>) { return 1.0; }, x, dom, cfg);
  EXPECT_EQ(res.stop_reason, "stagnation");
  EXPECT_EQ(res.generations, 7);
  EXPECT_EQ(res.history.size(), 8u);
}

TEST(Ga, MaxGenerationsCap) {
  const auto x = query();
  GAConfig cfg;
  cfg.max_generations = 3;
  const auto res = run_ga(height_sum, x, domains(x), cfg, 1000.0);
  EXPECT_EQ(res.stop_reason, "max_generations");
  EXPECT_EQ(res.generations, 3);
}

TEST(Ga, EvaluatesOnlyInBoundsPoints) {
  const auto x = query();
  const auto dom = domains(x);
  std::mutex mu;
  std::size_t calls = 0;
  const Objective f = [&](std::span<const double> z) {
    std::lock_guard<std::mutex> lock(mu);
    ++calls;
    for (std::size_t k = 0; k < kNumFeatures; ++k) {
      EXPECT_TRUE(dom[k].admits(z[k])) << "feature " << k;
      if (!dom[k].actionable) {
        EXPECT_EQ(z[k], x[k]);
      }
    }
    return height_sum(z);
  };
  GAConfig cfg;
  cfg.max_stagnation = 5;
  const auto res = run_ga(f, x, dom, cfg);
  EXPECT_EQ(calls, res.evaluations);
}

TEST(Ga, TrivialTargetStopsAtTheQuery) {
  const auto x = query();
  const auto res = run_ga(height_sum, x, domains(x), GAConfig{}, height_sum(x));
  EXPECT_TRUE(res.target_met);
  EXPECT_EQ(res.generations, 0);
  EXPECT_EQ(res.evaluations, 1u);
  EXPECT_EQ(res.best_point, x);
}

TEST(Ga, RejectsBadConfig) {
  GAConfig c;
  c.population = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.mutation_rate = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(fitness_source_from_string("model"), ConfigError);
  EXPECT_EQ(fitness_source_from_string("surrogate"), FitnessSource::kSurrogate);
}

TEST(Objective, MinChangeRanksValidAboveInvalid) {
  const auto x = query();
  const auto dom = domains(x);
  const auto model = testing::synthetic_svf_model();
  const Goal goal(TargetSpec::svf_increase(2), model.predict(x));
  const auto obj = min_change_objective(surrogate_outcome(model), goal, x, dom, 0.05);
  const double ceiling = cost_ceiling(dom, 0.05);
  EXPECT_NEAR(ceiling, 1 + 12 * 1.05, 1e-12);
  auto z = x;
  z[height_index(0)] = 3;  // -2 stories on hN: +3.0 SVF
  EXPECT_NEAR(obj(z), -(2.0 / 7 + 0.05), 1e-12);
  EXPECT_LT(obj(x), -ceiling);
  EXPECT_NEAR(obj(x), -(ceiling + 2), 1e-9);
  const auto never = min_change_objective([](std::span<const double>) { return std::optional<Prediction>{}; },
                                          goal, x, dom, 0.05);
  EXPECT_EQ(never(x), -std::numeric_limits<double>::infinity());
}

TEST(Oracle, OutcomeOfTheQueryIsTheBaseSimulation) {
  const auto& w = testing::small_world();
  const auto& [scenario, scene] = w.pairs[0];
  const auto x = scenario.features();
  const auto sampler = testing::fast_sampler();
  const auto svf = oracle_outcome(TargetSpec::svf_increase(5), sampler, x, scene)(x);
  ASSERT_TRUE(svf);
  EXPECT_DOUBLE_EQ(svf->value, compute_svf(scene, sampler));
  const auto cls = oracle_outcome(TargetSpec::class_promotion(0), sampler, x, scene)(x);
  ASSERT_TRUE(cls);
  EXPECT_EQ(cls->label, classify_visibility(*compute_visibility(scene, sampler)));
  EXPECT_EQ(cls->proba[static_cast<std::size_t>(cls->label)], 1.0);
  auto z = x;
  for (int d = 0; d < kNumDirections; ++d)
    if (z[height_index(d)] == 0) {
      z[height_index(d)] = 5;
      z[distance_index(d)] = 10;
      EXPECT_FALSE(oracle_outcome(TargetSpec::svf_increase(5), sampler, x, scene)(z));
      break;
    }
}

TEST(Benchmark, ReportsAllMethods) {
  const auto& w = testing::small_world();
  const auto model = train_gbdt(w.train, TrainConfig{}, TaskMode::kRegression);
  const auto& row = w.test.rows[0];
  std::optional<Scene> base;
  for (const auto& [s, scene] : w.pairs)
    if (s.id == row.scenario.id) base = scene;
  GAConfig ga;
  ga.max_stagnation = 5;
  ga.population = 20;
  const auto rep = benchmark(row.scenario, TargetSpec::svf_increase(3), model, w.train, testing::fast_sampler(), ga,
                             CounterfactualConfig{}, base);
  ASSERT_EQ(rep.rows.size(), 3u);
  EXPECT_EQ(rep.rows[0].method, "cfx");
  EXPECT_EQ(rep.rows[1].method, "ga_oracle");
  EXPECT_EQ(rep.rows[2].method, "ga_surrogate");
  for (const auto& r : rep.rows) {
    EXPECT_TRUE(r.error.empty()) << r.method << ": " << r.error;
    EXPECT_GT(r.evals, 0u);
    EXPECT_GE(r.wall_ms, 0.0);
  }
  EXPECT_EQ(rep.rows[2].evals, rep.ga_surrogate.evaluations + 1);
  EXPECT_GT(rep.oracle_eval_ms, 0.0);
  const auto text = benchmark_rows_csv(rep);
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) EXPECT_EQ(csv::split(line).size(), 9u) << line;
  EXPECT_EQ(csv::split(benchmark_header()).size(), 9u);
  const auto hist = history_to_csv(rep.ga_oracle);
  EXPECT_EQ(static_cast<std::size_t>(std::count(hist.begin(), hist.end(), '\n')), rep.ga_oracle.history.size() + 1);
}

TEST(Benchmark, FailingMethodIsRecordedNotThrown) {
  const auto& w = testing::small_world();
  const auto model = testing::synthetic_svf_model();
  GAConfig ga;
  ga.max_stagnation = 2;
  const auto rep = benchmark(w.test.rows[0].scenario, TargetSpec::class_promotion(0), model, w.train,
                             testing::fast_sampler(), ga, CounterfactualConfig{}, std::nullopt,
                             BenchmarkMethods{false, false});
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_FALSE(rep.rows[0].satisfied);
  EXPECT_NE(rep.rows[0].error.find("classifier"), std::string::npos);
}

}  // namespace
}  // namespace urbancfx
