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

// Re-simulation of counterfactual strategies with the geometric oracle and
// the resulting predicted-versus-simulated error statistics.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "urbancfx/counterfactual.hpp"
#include "urbancfx/simulate.hpp"

namespace urbancfx {

inline double rmse(std::span<const double> pred, std::span<const double> actual) {
  if (pred.empty() || pred.size() != actual.size()) throw DomainError("rmse: mismatched or empty inputs");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - actual[i]) * (pred[i] - actual[i]);
  return std::sqrt(s / static_cast<double>(pred.size()));
}

// "svf" pairs are percentages; "visibility_class" pairs are class labels.
struct ValidationPair {
  std::int64_t config_id = 0;
  int strategy_id = 0;
  std::string metric;
  double predicted = 0.0;
  std::optional<double> simulated;  // nullopt when the strategy is infeasible
  std::string status = "ok";

  bool feasible() const { return simulated.has_value(); }
  double abs_gap() const { return simulated ? std::abs(predicted - *simulated) : 0.0; }
};

struct ConfigRmse {
  std::int64_t config_id = 0;
  std::string metric;
  std::size_t n = 0;           // feasible pairs
  std::size_t infeasible = 0;
  std::optional<double> rmse;  // nullopt when no pair is feasible
};

struct SummaryStats {
  std::size_t n = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0, mean = 0.0;
};

// Quartiles by linear interpolation between order statistics.
inline SummaryStats summarize(std::vector<double> v) {
  SummaryStats s;
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  auto q = [&v](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  s.n = v.size();
  s.min = v.front();
  s.max = v.back();
  s.q1 = q(0.25);
  s.median = q(0.5);
  s.q3 = q(0.75);
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  return s;
}

struct MetricSummary {
  std::string metric;
  SummaryStats rmse;  // over configurations with at least one feasible pair
  std::size_t pairs = 0;
  std::size_t infeasible = 0;
  std::size_t configs_without_pairs = 0;
  std::optional<double> agreement;  // exact-match rate for class metrics
};

struct ValidationReport {
  std::vector<ValidationPair> pairs;
  std::vector<ConfigRmse> per_config;
  std::vector<MetricSummary> summaries;

  const MetricSummary* summary(const std::string& metric) const {
    for (const auto& s : summaries)
      if (s.metric == metric) return &s;
    return nullptr;
  }
};

// Derives per-configuration RMSE and summaries from raw pairs.
inline ValidationReport build_report(std::vector<ValidationPair> pairs) {
  ValidationReport rep;
  std::map<std::pair<std::string, std::int64_t>, std::vector<const ValidationPair*>> groups;
  for (const auto& p : pairs) groups[{p.metric, p.config_id}].push_back(&p);
  std::map<std::string, MetricSummary> sums;
  std::map<std::string, std::vector<double>> rmses;
  std::map<std::string, std::size_t> agree;
  for (const auto& [key, ps] : groups) {
    ConfigRmse c;
    c.metric = key.first;
    c.config_id = key.second;
    std::vector<double> pred, sim;
    auto& ms = sums[key.first];
    ms.metric = key.first;
    for (const auto* p : ps) {
      if (!p->feasible()) {
        ++c.infeasible;
        continue;
      }
      pred.push_back(p->predicted);
      sim.push_back(*p->simulated);
      if (p->predicted == *p->simulated) ++agree[key.first];
    }
    c.n = pred.size();
    ms.pairs += c.n;
    ms.infeasible += c.infeasible;
    if (c.n > 0) {
      c.rmse = rmse(pred, sim);
      rmses[key.first].push_back(*c.rmse);
    } else {
      ++ms.configs_without_pairs;
    }
    rep.per_config.push_back(c);
  }
  for (auto& [metric, ms] : sums) {
    ms.rmse = summarize(rmses[metric]);
    if (metric == "visibility_class" && ms.pairs > 0)
      ms.agreement = static_cast<double>(agree[metric]) / static_cast<double>(ms.pairs);
    rep.summaries.push_back(ms);
  }
  rep.pairs = std::move(pairs);
  return rep;
}

struct ValidationConfig {
  SamplerConfig sampler;
  double distance_tolerance = 0.5;  // metres, re-extracted vs requested
  int threads = 1;
};

// Scene for a strategy point: the edit applied to the base scene when one is
// given, the canonical layout otherwise. With a base scene the edited layout
// must reproduce the requested features.
inline Scene strategy_scene(const UrbanScenario& base, std::span<const double> point,
                            const std::optional<Scene>& base_scene, double distance_tolerance) {
  const auto to = UrbanScenario::from_features(point);
  if (!base_scene) return realize_scene(to);
  Scene scene = apply_scenario_edit(*base_scene, base, to);
  const auto back = extract_features(scene);
  for (int d = 0; d < kNumDirections; ++d) {
    if (back.heights[d] != to.heights[d])
      throw DomainError("edited scene changes the representative of sector " + std::string(kDirectionNames[d]));
    if (to.heights[d] > 0 &&
        std::abs(back.distances[d].value_or(kAbsentDistance) - *to.distances[d]) > distance_tolerance)
      throw DomainError("edited scene misses the distance of sector " + std::string(kDirectionNames[d]));
  }
  return scene;
}

// Re-simulates each strategy point of one configuration and pairs it with
// the model prediction. Infeasible strategies are kept as flagged pairs.
inline std::vector<ValidationPair> revalidate(std::int64_t config_id, const UrbanScenario& base,
                                              const std::vector<std::vector<double>>& points, const Model& model,
                                              const ValidationConfig& cfg = {},
                                              const std::optional<Scene>& base_scene = std::nullopt) {
  const bool svf = model.mode() == TaskMode::kRegression;
  std::vector<ValidationPair> out(points.size());
  parallel_for(points.size(), cfg.threads, [&](std::size_t i) {
    auto& p = out[i];
    p.config_id = config_id;
    p.strategy_id = static_cast<int>(i + 1);
    p.metric = svf ? "svf" : "visibility_class";
    const auto pr = model.predict(points[i]);
    p.predicted = svf ? pr.value : pr.label;
    try {
      const Scene scene = strategy_scene(base, points[i], base_scene, cfg.distance_tolerance);
      if (svf) {
        p.simulated = compute_svf(scene, cfg.sampler);
      } else if (const auto v = compute_visibility(scene, cfg.sampler)) {
        p.simulated = classify_visibility(*v);
      } else {
        p.status = "infeasible: no park viewpoint";
      }
    } catch (const DomainError& e) {
      p.status = std::string("infeasible: ") + e.what();
    }
  });
  return out;
}

inline std::string status_field(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  return s;
}

inline std::string validation_header() { return "config_id,strategy_id,metric,predicted,simulated,abs_gap,status"; }

inline std::string validation_to_csv(const ValidationReport& rep, const std::string& header_comment = {}) {
  std::ostringstream out;
  if (!header_comment.empty()) out << header_comment << '\n';
  out << validation_header() << '\n';
  for (const auto& p : rep.pairs)
    out << csv::join({std::to_string(p.config_id), std::to_string(p.strategy_id), p.metric,
                      csv::fixed(p.predicted, 6), p.simulated ? csv::fixed(*p.simulated, 6) : std::string(),
                      p.simulated ? csv::fixed(p.abs_gap(), 6) : std::string(), status_field(p.status)})
        << '\n';
  return out.str();
}

inline std::string config_rmse_to_csv(const ValidationReport& rep, const std::string& header_comment = {}) {
  std::ostringstream out;
  if (!header_comment.empty()) out << header_comment << '\n';
  out << "config_id,metric,n,infeasible,rmse\n";
  for (const auto& c : rep.per_config)
    out << c.config_id << ',' << c.metric << ',' << c.n << ',' << c.infeasible << ','
        << (c.rmse ? csv::fixed(*c.rmse, 6) : std::string()) << '\n';
  return out.str();
}

// One row per metric and statistic; the box plot is drawn from these.
inline std::string summary_to_csv(const ValidationReport& rep, const std::string& header_comment = {}) {
  std::ostringstream out;
  if (!header_comment.empty()) out << header_comment << '\n';
  out << "metric,stat,value\n";
  for (const auto& s : rep.summaries) {
    auto row = [&](const char* name, double v) { out << s.metric << ',' << name << ',' << csv::fixed(v, 6) << '\n'; };
    row("configs", static_cast<double>(s.rmse.n));
    row("pairs", static_cast<double>(s.pairs));
    row("infeasible", static_cast<double>(s.infeasible));
    row("configs_without_pairs", static_cast<double>(s.configs_without_pairs));
    row("min", s.rmse.min);
    row("q1", s.rmse.q1);
    row("median", s.rmse.median);
    row("q3", s.rmse.q3);
    row("max", s.rmse.max);
    row("mean", s.rmse.mean);
    if (s.agreement) row("agreement", *s.agreement);
  }
  return out.str();
}

}  // namespace urbancfx
