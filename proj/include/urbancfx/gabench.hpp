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

// Single-objective genetic algorithm over the counterfactual lattice, and
// the CFX-versus-GA benchmark.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "urbancfx/counterfactual.hpp"
#include "urbancfx/simulate.hpp"

namespace urbancfx {

enum class FitnessSource { kOracle, kSurrogate };

inline std::string to_string(FitnessSource s) { return s == FitnessSource::kOracle ? "oracle" : "surrogate"; }

inline FitnessSource fitness_source_from_string(const std::string& s) {
  if (s == "oracle") return FitnessSource::kOracle;
  if (s == "surrogate") return FitnessSource::kSurrogate;
  throw ConfigError("ga.fitness_source must be oracle or surrogate, got '" + s + "'");
}

struct GAConfig {
  int population = 50;
  int max_stagnation = 50;
  double initial_boost = 2.0;
  double maintain_rate = 0.05;
  double inbreeding = 0.75;
  double mutation_rate = 1.0 / 16.0;
  int max_generations = 500;
  std::uint64_t seed = 7;
  FitnessSource fitness_source = FitnessSource::kOracle;
  int threads = 1;

  void validate() const {
    auto rate = [](double v, const char* name) {
      if (!(v >= 0 && v <= 1)) throw ConfigError(std::string("ga.") + name + " must be in [0,1]");
    };
    if (population < 2) throw ConfigError("ga.population must be >= 2");
    if (max_stagnation < 1) throw ConfigError("ga.max_stagnation must be >= 1");
    if (!(initial_boost >= 1)) throw ConfigError("ga.initial_boost must be >= 1");
    rate(maintain_rate, "maintain_rate");
    rate(inbreeding, "inbreeding");
    rate(mutation_rate, "mutation_rate");
    if (max_generations < 0) throw ConfigError("ga.max_generations must be >= 0");
  }
};

using Objective = std::function<double(std::span<const double>)>;

struct GAResult {
  std::vector<double> best_point;
  double best_fitness = -std::numeric_limits<double>::infinity();
  std::vector<double> history;  // best fitness after each generation (0 = initial)
  std::size_t evaluations = 0;
  int generations = 0;
  bool target_met = false;
  std::string stop_reason;
  double wall_ms = 0.0;
};

// Gene value lists: heights over their lattice, distances over every
// lattice step between the bounds.
inline std::vector<std::vector<double>> gene_values(std::span<const double> x, const Domains& dom) {
  std::vector<std::vector<double>> genes;
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    if (!dom[f].actionable) continue;
    if (is_height_feature(f)) {
      genes.push_back(dom[f].lattice);
      continue;
    }
    std::vector<double> v;
    const double step = dom[f].step;
    const auto kmin = static_cast<long>(std::ceil((dom[f].lo - x[f]) / step - 1e-9));
    const auto kmax = static_cast<long>(std::floor((dom[f].hi - x[f]) / step + 1e-9));
    for (long k = kmin; k <= kmax; ++k) v.push_back(x[f] + static_cast<double>(k) * step);
    genes.push_back(std::move(v));
  }
  return genes;
}

// Maximizes `objective` over the lattice around x. Stops once the best
// fitness reaches `target` (when given), after max_stagnation generations
// without strict improvement, or at max_generations.
inline GAResult run_ga(const Objective& objective, std::span<const double> x, const Domains& dom,
                       const GAConfig& cfg, std::optional<double> target = std::nullopt) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::size_t> feats;
  for (std::size_t f = 0; f < kNumFeatures; ++f)
    if (dom[f].actionable) feats.push_back(f);
  const auto values = gene_values(x, dom);
  const std::size_t ng = feats.size();

  using Genome = std::vector<std::size_t>;
  auto decode = [&](const Genome& g) {
    std::vector<double> z(x.begin(), x.end());
    for (std::size_t i = 0; i < ng; ++i) z[feats[i]] = values[i][g[i]];
    for (int s = 0; s < kNumDirections; ++s)
      if (z[height_index(s)] == 0.0 && x[height_index(s)] != 0.0) z[distance_index(s)] = kAbsentDistance;
    return z;
  };

  std::map<std::vector<double>, double> cache;
  auto evaluate = [&](const std::vector<Genome>& pop) {
    std::vector<std::vector<double>> pts;
    for (const auto& g : pop) pts.push_back(decode(g));
    std::vector<std::vector<double>> todo;
    for (const auto& p : pts)
      if (!cache.count(p) && std::find(todo.begin(), todo.end(), p) == todo.end()) todo.push_back(p);
    std::vector<double> fit(todo.size());
    parallel_for(todo.size(), cfg.threads, [&](std::size_t i) { fit[i] = objective(todo[i]); });
    for (std::size_t i = 0; i < todo.size(); ++i) cache.emplace(todo[i], fit[i]);
    std::vector<double> out;
    for (const auto& p : pts) out.push_back(cache.at(p));
    return out;
  };

  GAResult res;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // The unmodified context is evaluated first; a met target ends the run.
  Genome start(ng);
  for (std::size_t i = 0; i < ng; ++i) {
    const auto& v = values[i];
    start[i] = static_cast<std::size_t>(std::find(v.begin(), v.end(), x[feats[i]]) - v.begin());
    if (start[i] == v.size()) start[i] = 0;
  }
  {
    const double f0 = evaluate({start})[0];
    res.best_fitness = f0;
    res.best_point = decode(start);
  }
  auto finish = [&](std::string why) {
    res.stop_reason = std::move(why);
    res.evaluations = cache.size();
    res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return res;
  };
  if (target && res.best_fitness >= *target) {
    res.target_met = true;
    res.history.push_back(res.best_fitness);
    return finish("target");
  }
  if (ng == 0) {
    res.history.push_back(res.best_fitness);
    return finish("no actionable genes");
  }

  const auto pop_n = static_cast<std::size_t>(cfg.population);
  const auto first_n = static_cast<std::size_t>(std::lround(cfg.initial_boost * cfg.population));
  std::vector<Genome> pop(first_n, Genome(ng));
  for (auto& g : pop)
    for (std::size_t i = 0; i < ng; ++i)
      g[i] = std::uniform_int_distribution<std::size_t>(0, values[i].size() - 1)(rng);
  std::vector<double> fit = evaluate(pop);

  auto rank = [&] {
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });
    std::vector<Genome> p;
    std::vector<double> f;
    for (std::size_t i = 0; i < std::min(order.size(), pop_n); ++i) {
      p.push_back(pop[order[i]]);
      f.push_back(fit[order[i]]);
    }
    pop = std::move(p);
    fit = std::move(f);
  };
  rank();

  int stagnant = 0;
  auto record = [&] {
    if (fit[0] > res.best_fitness) {
      res.best_fitness = fit[0];
      res.best_point = decode(pop[0]);
      stagnant = 0;
    } else {
      ++stagnant;
    }
    res.history.push_back(res.best_fitness);
  };
  if (fit[0] > res.best_fitness) {
    res.best_fitness = fit[0];
    res.best_point = decode(pop[0]);
  }
  res.history.push_back(res.best_fitness);

  const auto elites = std::min(pop_n, static_cast<std::size_t>(std::lround(cfg.maintain_rate * cfg.population)));
  auto tournament = [&](std::size_t limit) {
    std::uniform_int_distribution<std::size_t> pick(0, limit - 1);
    const std::size_t a = pick(rng), b = pick(rng);
    return std::min(a, b);  // population is sorted by fitness
  };

  while (true) {
    if (target && res.best_fitness >= *target) {
      res.target_met = true;
      return finish("target");
    }
    if (stagnant >= cfg.max_stagnation) return finish("stagnation");
    if (res.generations >= cfg.max_generations) return finish("max_generations");

    std::vector<Genome> next(pop.begin(), pop.begin() + static_cast<long>(elites));
    const std::size_t half = std::max<std::size_t>(1, pop.size() / 2);
    while (next.size() < pop_n) {
      const std::size_t limit = unit(rng) < cfg.inbreeding ? half : pop.size();
      const Genome& pa = pop[tournament(limit)];
      const Genome& pb = pop[tournament(limit)];
      Genome child(ng);
      for (std::size_t i = 0; i < ng; ++i) {
        child[i] = unit(rng) < 0.5 ? pa[i] : pb[i];
        if (unit(rng) < cfg.mutation_rate && values[i].size() > 1) {
          const bool up = unit(rng) < 0.5;
          if ((up && child[i] + 1 < values[i].size()) || child[i] == 0)
            ++child[i];
          else
            --child[i];
        }
      }
      next.push_back(std::move(child));
    }
    pop = std::move(next);
    fit = evaluate(pop);
    rank();
    ++res.generations;
    record();
  }
}

// --- benchmark --------------------------------------------------------------

// Model-like outcome of a feature vector; nullopt when it cannot be realized.
using OutcomeFn = std::function<std::optional<Prediction>(std::span<const double>)>;

// Oracle outcome: the edit x -> z applied to `base` (or, without a base
// scene, the canonical layout of z) and simulated. SVF targets report the
// SVF value; class targets report visibility and its class.
inline OutcomeFn oracle_outcome(const TargetSpec& target, const SamplerConfig& sampler,
                                std::span<const double> x, std::optional<Scene> base = std::nullopt) {
  const auto from = UrbanScenario::from_features(x);
  return [target, sampler, from, base](std::span<const double> z) -> std::optional<Prediction> {
    Scene scene;
    try {
      const auto to = UrbanScenario::from_features(z);
      scene = base ? apply_scenario_edit(*base, from, to) : realize_scene(to);
    } catch (const DomainError&) {
      return std::nullopt;
    }
    Prediction p;
    if (target.kind == TargetSpec::Kind::kSvfIncrease) {
      p.value = compute_svf(scene, sampler);
      return p;
    }
    const auto v = compute_visibility(scene, sampler);
    if (!v) return std::nullopt;
    p.value = *v;
    p.label = classify_visibility(*v);
    p.proba[static_cast<std::size_t>(p.label)] = 1.0;
    return p;
  };
}

inline OutcomeFn surrogate_outcome(const Model& m) {
  return [&m](std::span<const double> z) -> std::optional<Prediction> { return m.predict(z); };
}

// Upper bound on the cost of any in-bounds point.
inline double cost_ceiling(const Domains& dom, double lambda) {
  double c = 1.0;
  for (const auto& d : dom)
    if (d.actionable) c += 1.0 + lambda;
  return c;
}

// Minimal-change objective shared with CFX: -cost for points meeting the
// goal, -(ceiling + shortfall) otherwise, so every valid point outranks
// every invalid one. Unrealizable points score -inf.
inline Objective min_change_objective(OutcomeFn outcome, const Goal& goal, std::span<const double> x,
                                      const Domains& dom, double lambda) {
  const double ceiling = cost_ceiling(dom, lambda);
  std::vector<double> xv(x.begin(), x.end());
  return [outcome = std::move(outcome), goal, xv, dom, lambda, ceiling](std::span<const double> z) {
    const auto p = outcome(z);
    if (!p) return -std::numeric_limits<double>::infinity();
    if (goal.satisfied(*p)) return -strategy_cost(xv, z, dom, lambda);
    return -(ceiling + std::max(0.0, goal.score_threshold() - goal.score(*p)));
  };
}

struct BenchmarkRow {
  std::string method;
  std::int64_t scenario_id = 0;
  std::string target;
  double wall_ms = 0.0;
  std::size_t evals = 0;
  double best = 0.0;  // cost of the best point found
  bool satisfied = false;
  std::string error;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  double oracle_eval_ms = 0.0;  // mean wall time of one oracle evaluation
  int threads = 1;
  GAResult ga_oracle;
  GAResult ga_surrogate;

  const BenchmarkRow* find(const std::string& method) const {
    for (const auto& r : rows)
      if (r.method == method) return &r;
    return nullptr;
  }

  // GA-on-oracle wall time over CFX wall time.
  double speedup() const {
    const auto* ga = find("ga_oracle");
    const auto* cf = find("cfx");
    if (!ga || !cf || cf->wall_ms <= 0) return 0.0;
    return ga->wall_ms / cf->wall_ms;
  }
};

struct BenchmarkMethods {
  bool ga_oracle = true;
  bool ga_surrogate = true;
};

// Runs CFX (index build included) and the GA baselines on one scenario. All
// methods minimize the same sparse L1 cost subject to the target; a GA stops
// once it matches the CFX top-1 cost, or by its own stagnation rule. A
// failing method is recorded in its row without stopping the others.
inline BenchmarkReport benchmark(const UrbanScenario& scenario, const TargetSpec& target, const Model& model,
                                 const Dataset& pool_data, const SamplerConfig& sampler, const GAConfig& ga_cfg,
                                 const CounterfactualConfig& cfx_cfg, std::optional<Scene> base_scene = std::nullopt,
                                 BenchmarkMethods methods = {}) {
  using clock = std::chrono::steady_clock;
  auto elapsed = [](clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };
  BenchmarkReport rep;
  rep.threads = ga_cfg.threads;
  const auto x = scenario.features();
  const auto mask = ActionabilityMask::standard(cfx_cfg.allow_removal);
  const auto dom = make_domains(x, mask, cfx_cfg.lattice);
  const std::string tstr = target.str();

  std::optional<double> ga_target;
  {
    BenchmarkRow r{"cfx", scenario.id, tstr, 0.0, 0, 0.0, false, {}};
    const auto t0 = clock::now();
    try {
      const auto idx = build_candidate_index(pool_data, x, mask, cfx_cfg.lattice);
      const auto res = find_counterfactuals(model, x, target, idx, cfx_cfg);
      r.evals = res.evaluations;
      r.best = res.strategies.front().cost;
      r.satisfied = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    r.wall_ms = elapsed(t0);
    if (r.satisfied) ga_target = -r.best - 1e-9;
    rep.rows.push_back(r);
  }

  auto run = [&](const std::string& name, FitnessSource src, OutcomeFn outcome, GAResult& out) {
    BenchmarkRow r{name, scenario.id, tstr, 0.0, 0, 0.0, false, {}};
    const auto t0 = clock::now();
    try {
      const auto base = outcome(x);
      if (!base) throw DomainError("query point cannot be evaluated");
      const Goal goal(target, *base);
      GAConfig c = ga_cfg;
      c.fitness_source = src;
      const auto obj = min_change_objective(std::move(outcome), goal, x, dom, cfx_cfg.lambda);
      out = run_ga(obj, x, dom, c, ga_target);
      r.evals = out.evaluations + 1;
      r.satisfied = out.best_fitness > -cost_ceiling(dom, cfx_cfg.lambda);
      r.best = strategy_cost(x, out.best_point, dom, cfx_cfg.lambda);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    r.wall_ms = elapsed(t0);
    rep.rows.push_back(r);
    return r;
  };
  if (methods.ga_oracle) {
    const auto r = run("ga_oracle", FitnessSource::kOracle, oracle_outcome(target, sampler, x, base_scene),
                       rep.ga_oracle);
    if (r.evals > 0) rep.oracle_eval_ms = r.wall_ms / static_cast<double>(r.evals);
  }
  if (methods.ga_surrogate) run("ga_surrogate", FitnessSource::kSurrogate, surrogate_outcome(model), rep.ga_surrogate);
  return rep;
}

inline std::string benchmark_header() { return "method,scenario_id,target,wall_ms,evals,best,satisfied,workers,error"; }

inline std::string benchmark_rows_csv(const BenchmarkReport& rep) {
  std::ostringstream out;
  for (const auto& r : rep.rows)
    out << r.method << ',' << r.scenario_id << ',' << r.target << ',' << csv::fixed(r.wall_ms, 3) << ',' << r.evals
        << ',' << csv::fixed(r.best, 4) << ',' << (r.satisfied ? 1 : 0) << ',' << rep.threads << ','
        << r.error.substr(0, r.error.find(',')) << '\n';
  return out.str();
}

inline std::string history_to_csv(const GAResult& r, const std::string& header_comment = {}) {
  std::ostringstream out;
  if (!header_comment.empty()) out << header_comment << '\n';
  out << "generation,best_fitness\n";
  for (std::size_t g = 0; g < r.history.size(); ++g) out << g << ',' << csv::fixed(r.history[g], 6) << '\n';
  return out.str();
}

}  // namespace urbancfx
