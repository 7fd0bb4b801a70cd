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

// Small end-to-end run: generate blocks, simulate, train a surrogate,
// explain one prediction and ask for counterfactual strategies.

#include <iostream>

#include "urbancfx/urbancfx.hpp"

int main() {
  using namespace urbancfx;
  GeneratorConfig gen;
  gen.count = 240;
  SamplerConfig sampler;
  sampler.hemisphere_rays = 400;

  const auto pairs = generate_scenarios(gen);
  const auto data = simulate_dataset(pairs, sampler).complete_rows();
  const auto [train, test] = split(data, 0.8, 7);
  const auto model = train_gbdt(train, TrainConfig{}, TaskMode::kRegression);
  const auto m = evaluate(model, test);
  std::cout << "SVF surrogate: R2 " << m.r2 << ", MAE " << m.mae << " pp on " << m.n << " held-out blocks\n";

  const auto x = test.rows.front().scenario.features();
  const auto bg = background_sample(train.features(), 30, 7);
  const auto phi = shapley_sampled(model, x, bg, 100, 7);
  std::cout << "prediction " << phi.fx << " = base " << phi.base_value << " + sum(phi) " << phi.total() << '\n';

  const auto index = build_candidate_index(train, x);
  try {
    const auto res = find_counterfactuals(model, x, TargetSpec::svf_increase(5), index);
    std::cout << table_to_csv(strategy_diff_table(x, res.strategies, TargetSpec::svf_increase(5), res.baseline));
  } catch (const DomainError& e) {
    std::cout << "no strategy: " << e.what() << '\n';
  }
}
