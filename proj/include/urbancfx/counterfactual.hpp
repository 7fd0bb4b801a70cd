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

// Counterfactual search. Candidates (dataset rows sharing the query's
// context plus lattice perturbations of the query) are indexed in a KD-tree
// over normalized actionable coordinates and walked in increasing
// sparse-L1 cost until enough feasible, refined, mutually distinct
// strategies are found.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "urbancfx/csv.hpp"
#include "urbancfx/dataset.hpp"
#include "urbancfx/kdtree.hpp"
#include "urbancfx/model.hpp"

namespace urbancfx {

struct ActionabilityMask {
  std::array<bool, kNumFeatures> frozen{};
  // Permit h = 0 (building removal) for sectors that are occupied in x.
  bool allow_removal = false;

  static ActionabilityMask standard(bool allow_removal = false) {
    ActionabilityMask m;
    for (std::size_t f = 0; f < kHeightBase; ++f) m.frozen[f] = true;
    m.allow_removal = allow_removal;
    return m;
  }
};

struct LatticeConfig {
  double height_step = 1.0;
  double distance_step = 2.0;
  std::size_t min_pool = 500;
  int max_changed = 2;
  int distance_radius = 10;  // lattice steps either side of x

  void validate() const {
    if (height_step != 1.0) throw ConfigError("cfx.height_step must be 1 (integer stories)");
    if (!(distance_step > 0)) throw ConfigError("cfx.distance_step must be > 0");
    if (max_changed < 1 || max_changed > 3) throw ConfigError("cfx.max_changed must be in [1,3]");
    if (distance_radius < 1) throw ConfigError("cfx.distance_radius must be >= 1");
  }
};

struct TargetSpec {
  enum class Kind { kSvfIncrease, kClassPromotion };
  Kind kind = Kind::kSvfIncrease;
  double delta = 5.0;  // percentage points
  int from = 0;
  int to = 1;

  static TargetSpec svf_increase(double delta = 5.0) {
    if (!(delta > 0)) throw DomainError("svf target delta must be > 0");
    return {Kind::kSvfIncrease, delta, 0, 0};
  }
  static TargetSpec class_promotion(int from) {
    if (from < 0 || from + 1 >= kNumClasses) throw DomainError("class promotion needs from in {0,1}");
    return {Kind::kClassPromotion, 0.0, from, from + 1};
  }

  // "svf+9", "svf" (default delta) or "class+1".
  static TargetSpec parse(const std::string& s, int current_class = 0) {
    if (s == "svf") return svf_increase();
    if (s.starts_with("svf+")) return svf_increase(csv::parse_double(s.substr(4), "target delta"));
    if (s == "class+1" || s == "class" || s == "visibility+1") return class_promotion(current_class);
    throw ConfigError("unknown target '" + s + "' (expected svf+<delta> or class+1)");
  }

  std::string str() const {
    return kind == Kind::kSvfIncrease ? "svf+" + csv::fmt(delta)
                                      : "class" + std::to_string(from) + "->" + std::to_string(to);
  }
};

// A target bound to the model output at the query point.
struct Goal {
  TargetSpec spec;
  double threshold = 0.0;  // SVF level to reach
  Prediction baseline;

  Goal(const TargetSpec& t, const Prediction& base) : spec(t), baseline(base) {
    if (t.kind == TargetSpec::Kind::kSvfIncrease) threshold = base.value + t.delta;
  }

  bool satisfied(const Prediction& p) const {
    return spec.kind == TargetSpec::Kind::kSvfIncrease ? p.value >= threshold : p.label >= spec.to;
  }

  // Scalar objective for search baselines (larger is better).
  double score(const Prediction& p) const {
    return spec.kind == TargetSpec::Kind::kSvfIncrease ? p.value
                                                       : p.label + p.proba[static_cast<std::size_t>(spec.to)];
  }

  double score_threshold() const {
    return spec.kind == TargetSpec::Kind::kSvfIncrease ? threshold : static_cast<double>(spec.to);
  }
};

// Admissible values of one feature around a query.
struct FeatureDomain {
  bool actionable = false;
  double lo = 0.0, hi = 0.0;
  double range = 1.0;  // normalization span
  double step = 1.0;
  std::vector<double> lattice;  // values on the lattice through x, within bounds

  bool admits(double v) const { return v >= lo - 1e-9 && v <= hi + 1e-9; }
};

using Domains = std::array<FeatureDomain, kNumFeatures>;

inline int sector_of_feature(std::size_t f) {
  return static_cast<int>(is_height_feature(f) ? f - kHeightBase : f - kDistanceBase);
}

// Sectors empty in x stay frozen. Present heights range over [3,10] (plus 0
// when removal is allowed); distances over [street/2, 100] on the lattice.
inline Domains make_domains(std::span<const double> x, const ActionabilityMask& mask, const LatticeConfig& lat) {
  lat.validate();
  if (x.size() != kNumFeatures) throw DomainError("counterfactual: query must have 21 features");
  Domains dom;
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    auto& d = dom[f];
    d.lo = d.hi = x[f];
    if (mask.frozen[f] || f < kHeightBase) continue;
    const int sector = sector_of_feature(f);
    if (x[height_index(sector)] == 0) continue;
    d.actionable = true;
    if (is_height_feature(f)) {
      d.lo = mask.allow_removal ? 0.0 : std::min(3.0, x[f]);
      d.hi = 10.0;
      d.step = lat.height_step;
      if (mask.allow_removal) d.lattice.push_back(0.0);
      for (int h = 3; h <= 10; ++h) d.lattice.push_back(h);
      if (x[f] < 3) d.lattice.insert(d.lattice.begin() + (mask.allow_removal ? 1 : 0), x[f]);
    } else {
      d.lo = std::min(x[kStreetWidth] / 2, x[f]);
      d.hi = std::max(kAbsentDistance, x[f]);
      d.step = lat.distance_step;
      for (int k = -lat.distance_radius; k <= lat.distance_radius; ++k) {
        const double v = x[f] + k * lat.distance_step;
        if (v >= d.lo - 1e-9 && v <= d.hi + 1e-9) d.lattice.push_back(v);
      }
    }
    d.range = std::max(d.hi - d.lo, 1e-9);
  }
  return dom;
}

// Sparse L1 cost in normalized units: sum |delta| + lambda * [delta != 0].
struct SparseL1 {
  double lambda = 0.05;
  double operator()(std::size_t, double delta) const { return delta + (delta > 1e-12 ? lambda : 0.0); }
};

inline double strategy_cost(std::span<const double> x, std::span<const double> z, const Domains& dom,
                            double lambda) {
  double c = 0.0;
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    if (!dom[f].actionable || z[f] == x[f]) continue;
    c += std::abs(z[f] - x[f]) / dom[f].range + lambda;
  }
  return c;
}

struct CandidateIndex {
  std::vector<double> x;
  Domains domains{};
  std::vector<std::size_t> actionable;  // feature indices of the KD coordinates
  Matrix points;                        // full 21-feature candidates
  std::size_t from_dataset = 0;
  std::size_t synthetic = 0;
  std::vector<double> pool_lo, pool_hi;  // per-feature range over the pool
  KdTree tree;

  std::vector<double> coords(std::span<const double> z) const {
    std::vector<double> c(actionable.size());
    for (std::size_t i = 0; i < actionable.size(); ++i) {
      const auto& d = domains[actionable[i]];
      c[i] = (z[actionable[i]] - d.lo) / d.range;
    }
    return c;
  }
};

namespace detail {

// A single lattice move: one or two feature assignments (removal sets h=0
// and d to the sentinel together).
struct Move {
  std::vector<std::pair<std::size_t, double>> sets;
};

inline std::vector<Move> lattice_moves(std::span<const double> x, const Domains& dom) {
  std::vector<Move> moves;
  for (std::size_t f = kHeightBase; f < kNumFeatures; ++f) {
    if (!dom[f].actionable) continue;
    for (double v : dom[f].lattice) {
      if (v == x[f]) continue;
      Move m;
      m.sets.push_back({f, v});
      if (is_height_feature(f) && v == 0.0) {
        const auto df = distance_index(sector_of_feature(f));
        if (x[df] != kAbsentDistance) m.sets.push_back({df, kAbsentDistance});
      }
      moves.push_back(std::move(m));
    }
  }
  return moves;
}

// Whether z may stand as a candidate for x: frozen features equal, every
// actionable value within bounds, removed sectors carry the sentinel.
inline bool admissible(std::span<const double> x, std::span<const double> z, const Domains& dom) {
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    if (!dom[f].actionable) {
      if (z[f] != x[f]) return false;
      continue;
    }
    if (!dom[f].admits(z[f])) return false;
    if (is_height_feature(f)) {
      if (z[f] != std::round(z[f])) return false;
      if (z[f] > 0 && z[f] < 3 && z[f] != x[f]) return false;
      if (z[f] == 0 && z[distance_index(sector_of_feature(f))] != kAbsentDistance) return false;
    }
  }
  return true;
}

inline bool close_rel(double a, double b, double rel) { return std::abs(a - b) <= rel * std::abs(b); }

}  // namespace detail

inline CandidateIndex build_candidate_index(const Dataset& data, std::span<const double> x,
                                            const ActionabilityMask& mask = ActionabilityMask::standard(),
                                            const LatticeConfig& lat = {}) {
  CandidateIndex idx;
  idx.x.assign(x.begin(), x.end());
  idx.domains = make_domains(x, mask, lat);
  for (std::size_t f = 0; f < kNumFeatures; ++f)
    if (idx.domains[f].actionable) idx.actionable.push_back(f);

  std::set<std::vector<double>> seen;
  auto add = [&](std::vector<double> z) {
    if (seen.insert(z).second) idx.points.push_row(z);
  };

  for (const auto& row : data.rows) {
    auto z = row.scenario.features();
    if (z[kOrientation] != x[kOrientation] || z[kStreetWidth] != x[kStreetWidth]) continue;
    if (!detail::close_rel(z[kBuildingWidth], x[kBuildingWidth], 0.01) ||
        !detail::close_rel(z[kBuildingLength], x[kBuildingLength], 0.01) ||
        !detail::close_rel(z[kParkArea], x[kParkArea], 0.01))
      continue;
    for (std::size_t f = 0; f < kNumFeatures; ++f)
      if (mask.frozen[f]) z[f] = x[f];
    if (!detail::admissible(x, z, idx.domains)) continue;
    add(std::move(z));
  }
  idx.from_dataset = idx.points.rows();

  if (idx.points.rows() < lat.min_pool) {
    const auto moves = detail::lattice_moves(x, idx.domains);
    std::vector<double> z(x.begin(), x.end());
    std::vector<bool> touched(kNumFeatures, false);
    // Combinations of moves on distinct features, at most max_changed
    // features changed in total.
    auto rec = [&](auto&& self, std::size_t start, int changed) -> void {
      for (std::size_t i = start; i < moves.size(); ++i) {
        const auto& m = moves[i];
        const int c = static_cast<int>(m.sets.size());
        if (changed + c > lat.max_changed) continue;
        bool clash = false;
        for (auto& [f, v] : m.sets) clash = clash || touched[f];
        // A removal fixes the sector's distance; no separate distance move.
        if (!clash && is_height_feature(m.sets[0].first) && m.sets[0].second == 0.0)
          clash = touched[distance_index(sector_of_feature(m.sets[0].first))];
        if (!clash && is_distance_feature(m.sets[0].first))
          clash = z[height_index(sector_of_feature(m.sets[0].first))] == 0.0;
        if (clash) continue;
        for (auto& [f, v] : m.sets) {
          touched[f] = true;
          z[f] = v;
        }
        add(z);
        self(self, i + 1, changed + c);
        for (auto& [f, v] : m.sets) {
          touched[f] = false;
          z[f] = x[f];
        }
      }
    };
    add(z);
    rec(rec, 0, 0);
  }
  idx.synthetic = idx.points.rows() - idx.from_dataset;
  idx.pool_lo = idx.x;
  idx.pool_hi = idx.x;
  for (std::size_t r = 0; r < idx.points.rows(); ++r)
    for (auto f : idx.actionable) {
      idx.pool_lo[f] = std::min(idx.pool_lo[f], idx.points(r, f));
      idx.pool_hi[f] = std::max(idx.pool_hi[f], idx.points(r, f));
    }
  if (idx.points.rows() == 0) throw DomainError("build_candidate_index: empty candidate pool");
  if (idx.actionable.empty()) {
    idx.tree = KdTree(std::vector<double>(idx.points.rows(), 0.0), 1);
    return idx;
  }

  std::vector<double> flat;
  flat.reserve(idx.points.rows() * idx.actionable.size());
  for (std::size_t r = 0; r < idx.points.rows(); ++r) {
    const auto c = idx.coords(idx.points.row(r));
    flat.insert(flat.end(), c.begin(), c.end());
  }
  idx.tree = KdTree(std::move(flat), idx.actionable.size());
  return idx;
}

// Memoizing model wrapper that counts distinct evaluations.
class CountingModel {
 public:
  explicit CountingModel(const Model& m) : model_(m) {}

  const Prediction& predict(std::span<const double> z) {
    std::vector<double> key(z.begin(), z.end());
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(std::move(key), model_.predict(z)).first;
    return it->second;
  }

  std::size_t evaluations() const { return cache_.size(); }
  const Model& model() const { return model_; }

 private:
  const Model& model_;
  std::map<std::vector<double>, Prediction> cache_;
};

// Exact infeasibility screen for models that expose output bounds. For a
// candidate changing feature set S, the model output is bounded over the box
// that frees S to its pool range; if the bound cannot meet the goal, no
// candidate changing exactly S (or a subset of it) can, and no evaluation is
// spent. Bounds are cached per changed set.
class OutputScreen {
 public:
  OutputScreen(const Model& m, std::span<const double> x, const Goal& goal, std::vector<double> lo,
               std::vector<double> hi)
      : model_(m), x_(x.begin(), x.end()), goal_(goal), lo_(std::move(lo)), hi_(std::move(hi)) {}

  bool may_satisfy(std::span<const double> z) {
    std::uint32_t mask = 0;
    for (std::size_t f = 0; f < x_.size(); ++f)
      if (z[f] != x_[f]) mask |= std::uint32_t{1} << f;
    auto it = cache_.find(mask);
    if (it == cache_.end()) it = cache_.emplace(mask, compute(mask)).first;
    if (!it->second) ++screened_;
    return it->second;
  }

  std::size_t screened() const { return screened_; }

 private:
  bool compute(std::uint32_t mask) const {
    std::vector<double> lo(x_), hi(x_);
    for (std::size_t f = 0; f < x_.size(); ++f)
      if (mask >> f & 1) {
        lo[f] = lo_[f];
        hi[f] = hi_[f];
      }
    const auto r = model_.output_range(lo, hi);
    if (!r) return true;
    if (goal_.spec.kind == TargetSpec::Kind::kSvfIncrease) return (*r)[0].second >= goal_.threshold;
    double rival = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < goal_.spec.to; ++c) rival = std::max(rival, (*r)[static_cast<std::size_t>(c)].first);
    for (int c = goal_.spec.to; c < kNumClasses; ++c)
      if ((*r)[static_cast<std::size_t>(c)].second >= rival) return true;
    return false;
  }

  const Model& model_;
  std::vector<double> x_;
  Goal goal_;
  std::vector<double> lo_, hi_;
  std::map<std::uint32_t, bool> cache_;
  std::size_t screened_ = 0;
};

struct CounterfactualStrategy {
  std::vector<std::pair<std::size_t, double>> deltas;  // (feature, signed change), ascending feature
  std::vector<double> point;
  double predicted = 0.0;  // SVF or class
  Prediction prediction;
  double cost = 0.0;
  std::optional<double> simulated;
  std::optional<int> simulated_class;

  std::size_t changed_count() const { return deltas.size(); }

  std::vector<std::size_t> changed_features() const {
    std::vector<std::size_t> f;
    for (auto& [i, v] : deltas) f.push_back(i);
    return f;
  }
};

struct CounterfactualConfig {
  int k = 5;
  double lambda = 0.05;
  double svf_delta = 5.0;
  bool allow_removal = false;
  LatticeConfig lattice;

  void validate() const {
    if (k < 1) throw ConfigError("cfx.k must be >= 1");
    if (!(lambda >= 0)) throw ConfigError("cfx.lambda must be >= 0");
    if (!(svf_delta > 0)) throw ConfigError("cfx.svf_delta must be > 0");
    lattice.validate();
  }
};

struct CounterfactualResult {
  std::vector<CounterfactualStrategy> strategies;
  Prediction baseline;
  bool already_satisfied = false;
  std::optional<std::string> warning;
  std::size_t evaluations = 0;
  std::size_t visited = 0;
  std::size_t screened = 0;  // candidates rejected by the output bound
};

inline CounterfactualStrategy make_strategy(std::span<const double> x, std::vector<double> z, const Prediction& p,
                                            const Domains& dom, double lambda) {
  CounterfactualStrategy s;
  for (std::size_t f = 0; f < kNumFeatures; ++f)
    if (z[f] != x[f]) s.deltas.push_back({f, z[f] - x[f]});
  s.cost = strategy_cost(x, z, dom, lambda);
  s.point = std::move(z);
  s.prediction = p;
  s.predicted = p.label >= 0 ? p.label : p.value;
  return s;
}

// Coordinate back-off to a per-coordinate local minimum. Shrink passes walk
// changed features by descending normalized |delta|, one lattice step at a
// time while the goal holds; zero-out passes then try to drop whole
// features. Repeats until nothing changes.
inline std::vector<double> refine_minimal(std::vector<double> z, std::span<const double> x, const Domains& dom,
                                          const Goal& goal, CountingModel& model, OutputScreen* screen = nullptr) {
  auto feasible = [&](const std::vector<double>& p) {
    return (!screen || screen->may_satisfy(p)) && goal.satisfied(model.predict(p));
  };
  auto removed = [&](std::size_t f) { return z[height_index(sector_of_feature(f))] == 0.0 && x[height_index(sector_of_feature(f))] != 0.0; };

  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::size_t> order;
    for (std::size_t f = 0; f < kNumFeatures; ++f)
      if (dom[f].actionable && z[f] != x[f] && !removed(f)) order.push_back(f);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(z[a] - x[a]) / dom[a].range > std::abs(z[b] - x[b]) / dom[b].range;
    });
    for (auto f : order) {
      while (z[f] != x[f]) {
        auto t = z;
        const double gap = x[f] - z[f];
        t[f] = std::abs(gap) <= dom[f].step ? x[f] : z[f] + std::copysign(dom[f].step, gap);
        if (!feasible(t)) break;
        z = std::move(t);
        changed = true;
      }
    }
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      if (!dom[f].actionable || z[f] == x[f]) continue;
      auto t = z;
      t[f] = x[f];
      if (is_height_feature(f) && z[f] == 0.0) t[distance_index(sector_of_feature(f))] = x[distance_index(sector_of_feature(f))];
      if (is_distance_feature(f) && removed(f)) continue;
      if (feasible(t)) {
        z = std::move(t);
        changed = true;
      }
    }
  }
  return z;
}

inline CounterfactualResult find_counterfactuals(const Model& model, std::span<const double> x, const TargetSpec& target,
                                                 const CandidateIndex& index, const CounterfactualConfig& cfg = {}) {
  cfg.validate();
  CountingModel counted(model);
  CounterfactualResult res;
  res.baseline = counted.predict(x);
  const Goal goal(target, res.baseline);
  if (target.kind == TargetSpec::Kind::kClassPromotion && model.mode() != TaskMode::kMulticlass)
    throw DomainError("class promotion target needs a classifier");
  if (target.kind == TargetSpec::Kind::kSvfIncrease && model.mode() != TaskMode::kRegression)
    throw DomainError("svf target needs a regression model");

  if (goal.satisfied(res.baseline)) {
    res.already_satisfied = true;
    res.strategies.push_back(make_strategy(x, {x.begin(), x.end()}, res.baseline, index.domains, cfg.lambda));
    res.evaluations = counted.evaluations();
    return res;
  }

  OutputScreen screen(model, x, goal, index.pool_lo, index.pool_hi);
  std::set<std::vector<std::size_t>> seen_sets;
  if (!index.actionable.empty()) {
    auto search = index.tree.search(index.coords(x), SparseL1{cfg.lambda});
    while (res.strategies.size() < static_cast<std::size_t>(cfg.k)) {
      const auto nb = search.next();
      if (!nb) break;
      ++res.visited;
      const auto cand = index.points.row(nb->index);
      if (!screen.may_satisfy(cand) || !goal.satisfied(counted.predict(cand))) continue;
      auto z = refine_minimal({cand.begin(), cand.end()}, x, index.domains, goal, counted, &screen);
      const Prediction p = counted.predict(z);
      auto s = make_strategy(x, std::move(z), p, index.domains, cfg.lambda);
      if (!seen_sets.insert(s.changed_features()).second) continue;
      res.strategies.push_back(std::move(s));
    }
  }
  res.evaluations = counted.evaluations();
  res.screened = screen.screened();
  if (res.strategies.empty())
    throw DomainError("target " + target.str() + " unreachable in candidate pool of " +
                      std::to_string(index.points.rows()) + " points");
  if (res.strategies.size() < static_cast<std::size_t>(cfg.k))
    res.warning = "only " + std::to_string(res.strategies.size()) + " of " + std::to_string(cfg.k) +
                  " requested strategies found";
  std::stable_sort(res.strategies.begin(), res.strategies.end(),
                   [](const auto& a, const auto& b) { return a.cost < b.cost; });
  return res;
}

// Exhaustive minimum-cost feasible point of a pool.
inline std::optional<std::pair<std::size_t, double>> brute_force_min_cost(const Model& model, std::span<const double> x,
                                                                          const Goal& goal, const CandidateIndex& index,
                                                                          double lambda) {
  std::optional<std::pair<std::size_t, double>> best;
  for (std::size_t r = 0; r < index.points.rows(); ++r) {
    const auto z = index.points.row(r);
    if (!goal.satisfied(model.predict(z))) continue;
    const double c = strategy_cost(x, z, index.domains, lambda);
    if (!best || c < best->second) best = {r, c};
  }
  return best;
}

// Diff table: rows hN..dNW plus an outcome row; columns Main, S1..Sk.
// Blank cells mean "no change". For SVF the outcome row holds the baseline
// and the predicted change; for visibility the baseline and new class.
inline csv::Table strategy_diff_table(std::span<const double> x, const std::vector<CounterfactualStrategy>& strategies,
                                      const TargetSpec& target, const Prediction& baseline) {
  csv::Table t;
  t.header = {"feature", "Main"};
  for (std::size_t i = 0; i < strategies.size(); ++i) t.header.push_back("S" + std::to_string(i + 1));
  const auto& names = feature_names();
  for (std::size_t f = kHeightBase; f < kNumFeatures; ++f) {
    std::vector<std::string> row = {names[f]};
    const bool absent = x[height_index(sector_of_feature(f))] == 0.0;
    row.push_back(absent && is_distance_feature(f) ? std::string() : csv::fmt(x[f]));
    for (const auto& s : strategies) {
      std::string cell;
      for (auto& [g, d] : s.deltas)
        if (g == f) cell = csv::fmt(d);
      row.push_back(cell);
    }
    t.rows.push_back(std::move(row));
  }
  std::vector<std::string> out;
  if (target.kind == TargetSpec::Kind::kSvfIncrease) {
    out = {"SVF", csv::fixed(baseline.value, 2)};
    for (const auto& s : strategies) out.push_back(csv::fixed(s.prediction.value - baseline.value, 2));
  } else {
    out = {"Visibility", std::to_string(baseline.label)};
    for (const auto& s : strategies) out.push_back(std::to_string(s.prediction.label));
  }
  t.rows.push_back(std::move(out));
  return t;
}

inline std::string table_to_csv(const csv::Table& t, const std::string& header_comment = {}) {
  std::ostringstream out;
  if (!header_comment.empty()) out << header_comment << '\n';
  out << csv::join(t.header) << '\n';
  for (const auto& r : t.rows) out << csv::join(r) << '\n';
  return out.str();
}

// Recovers per-strategy deltas from a diff table.
inline std::vector<std::vector<std::pair<std::size_t, double>>> parse_strategy_deltas(const csv::Table& t) {
  std::vector<std::vector<std::pair<std::size_t, double>>> out(t.header.size() > 2 ? t.header.size() - 2 : 0);
  const auto& names = feature_names();
  for (const auto& row : t.rows) {
    auto it = std::find(names.begin(), names.end(), row.at(0));
    if (it == names.end()) continue;
    const auto f = static_cast<std::size_t>(it - names.begin());
    for (std::size_t s = 0; s < out.size(); ++s)
      if (auto v = csv::parse_opt(row.at(s + 2), "delta")) out[s].push_back({f, *v});
  }
  return out;
}

}  // namespace urbancfx
