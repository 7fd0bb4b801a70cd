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

// Interventional Shapley values. The coalition value v(S) is the model
// output averaged over a background set, with features in S taken from the
// explained instance and the rest from each background row.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "urbancfx/csv.hpp"
#include "urbancfx/model.hpp"

namespace urbancfx {

using ScoreFn = std::function<double(std::span<const double>)>;

struct ShapleyAttribution {
  std::vector<double> phi;
  std::vector<double> se;  // zeros for the exact estimator
  double base_value = 0.0;
  double fx = 0.0;
  std::vector<double> x;
  std::string estimator = "exact";
  int n_permutations = 0;
  std::uint64_t seed = 0;
  std::string model_fingerprint;

  double total() const { return base_value + std::accumulate(phi.begin(), phi.end(), 0.0); }
};

namespace detail {

// Features where x differs from at least one background row. All others
// are null players and receive phi = 0.
inline std::vector<std::size_t> active_features(std::span<const double> x, const Matrix& bg) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < x.size(); ++c)
    for (std::size_t r = 0; r < bg.rows(); ++r)
      if (bg(r, c) != x[c]) {
        out.push_back(c);
        break;
      }
  return out;
}

inline void check_inputs(std::span<const double> x, const Matrix& bg) {
  if (bg.rows() == 0) throw DomainError("shapley: empty background set");
  if (bg.cols() != x.size()) throw DomainError("shapley: background width does not match instance");
}

}  // namespace detail

inline ShapleyAttribution shapley_exact(const ScoreFn& f, std::span<const double> x, const Matrix& bg,
                                        std::size_t feature_subset_limit = 12) {
  detail::check_inputs(x, bg);
  const auto active = detail::active_features(x, bg);
  const std::size_t m = active.size();
  if (m > feature_subset_limit)
    throw DomainError("shapley_exact: " + std::to_string(m) + " active features exceed the limit of " +
                      std::to_string(feature_subset_limit) + "; use the sampled estimator");

  // v[mask] over subsets of the active features.
  std::vector<double> v(std::size_t{1} << m, 0.0);
  std::vector<double> z(x.size());
  for (std::size_t mask = 0; mask < v.size(); ++mask) {
    double acc = 0.0;
    for (std::size_t r = 0; r < bg.rows(); ++r) {
      auto row = bg.row(r);
      std::copy(row.begin(), row.end(), z.begin());
      for (std::size_t j = 0; j < m; ++j)
        if (mask >> j & 1) z[active[j]] = x[active[j]];
      acc += f(z);
    }
    v[mask] = acc / static_cast<double>(bg.rows());
  }

  // w(s) = s!(m-s-1)!/m!
  std::vector<double> w(m > 0 ? m : 1, 0.0);
  for (std::size_t s = 0; s < m; ++s)
    w[s] = std::exp(std::lgamma(s + 1.0) + std::lgamma(static_cast<double>(m - s)) - std::lgamma(m + 1.0));

  ShapleyAttribution a;
  a.phi.assign(x.size(), 0.0);
  a.se.assign(x.size(), 0.0);
  a.x.assign(x.begin(), x.end());
  a.base_value = v[0];
  a.fx = v.back();
  for (std::size_t j = 0; j < m; ++j) {
    double phi = 0.0;
    for (std::size_t mask = 0; mask < v.size(); ++mask) {
      if (mask >> j & 1) continue;
      phi += w[static_cast<std::size_t>(std::popcount(mask))] * (v[mask | std::size_t{1} << j] - v[mask]);
    }
    a.phi[active[j]] = phi;
  }
  return a;
}

// Antithetic permutation sampling: each drawn permutation is paired with its
// reverse. Standard errors come from the spread of the pair means.
inline ShapleyAttribution shapley_sampled(const ScoreFn& f, std::span<const double> x, const Matrix& bg,
                                          int n_permutations, std::uint64_t seed) {
  detail::check_inputs(x, bg);
  if (n_permutations < 10) throw DomainError("shapley_sampled: n_permutations must be >= 10");
  const auto active = detail::active_features(x, bg);
  const std::size_t m = active.size();
  const std::size_t pairs = static_cast<std::size_t>((n_permutations + 1) / 2);
  const double nb = static_cast<double>(bg.rows());

  ShapleyAttribution a;
  a.phi.assign(x.size(), 0.0);
  a.se.assign(x.size(), 0.0);
  a.x.assign(x.begin(), x.end());
  a.estimator = "sampled";
  a.n_permutations = static_cast<int>(2 * pairs);
  a.seed = seed;

  std::vector<double> z(x.size());
  auto base_and_fx = [&] {
    double b = 0.0, fx = 0.0;
    for (std::size_t r = 0; r < bg.rows(); ++r) {
      auto row = bg.row(r);
      std::copy(row.begin(), row.end(), z.begin());
      b += f(z);
      for (auto c : active) z[c] = x[c];
      fx += f(z);
    }
    return std::pair{b / nb, fx / nb};
  };
  std::tie(a.base_value, a.fx) = base_and_fx();
  if (m == 0) return a;

  // Marginal contributions along one ordering, averaged over background.
  std::vector<double> contrib(m);
  auto walk = [&](const std::vector<std::size_t>& order) {
    std::fill(contrib.begin(), contrib.end(), 0.0);
    for (std::size_t r = 0; r < bg.rows(); ++r) {
      auto row = bg.row(r);
      std::copy(row.begin(), row.end(), z.begin());
      double prev = f(z);
      for (auto j : order) {
        z[active[j]] = x[active[j]];
        const double cur = f(z);
        contrib[j] += cur - prev;
        prev = cur;
      }
    }
    for (auto& c : contrib) c /= nb;
  };

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> sum(m, 0.0), sumsq(m, 0.0), pair_mean(m);
  for (std::size_t p = 0; p < pairs; ++p) {
    std::shuffle(order.begin(), order.end(), rng);
    walk(order);
    for (std::size_t j = 0; j < m; ++j) pair_mean[j] = contrib[j];
    std::vector<std::size_t> rev(order.rbegin(), order.rend());
    walk(rev);
    for (std::size_t j = 0; j < m; ++j) {
      pair_mean[j] = (pair_mean[j] + contrib[j]) / 2;
      sum[j] += pair_mean[j];
      sumsq[j] += pair_mean[j] * pair_mean[j];
    }
  }
  const double np = static_cast<double>(pairs);
  for (std::size_t j = 0; j < m; ++j) {
    const double mean = sum[j] / np;
    const double var = pairs > 1 ? std::max(0.0, (sumsq[j] - np * mean * mean) / (np - 1)) : 0.0;
    a.phi[active[j]] = mean;
    a.se[active[j]] = std::sqrt(var / np);
  }
  return a;
}

// Explained score of a model: the regression output, or the raw score of
// the class predicted at x.
inline ScoreFn score_fn(const Model& m, std::span<const double> x) {
  const int cls = m.mode() == TaskMode::kRegression ? -1 : m.predict(x).label;
  return [&m, cls](std::span<const double> z) { return model_score(m, z, cls); };
}

inline ShapleyAttribution shapley_exact(const Model& m, std::span<const double> x, const Matrix& bg,
                                        std::size_t feature_subset_limit = 12) {
  auto a = shapley_exact(score_fn(m, x), x, bg, feature_subset_limit);
  a.model_fingerprint = m.fingerprint();
  return a;
}

inline ShapleyAttribution shapley_sampled(const Model& m, std::span<const double> x, const Matrix& bg,
                                          int n_permutations, std::uint64_t seed) {
  auto a = shapley_sampled(score_fn(m, x), x, bg, n_permutations, seed);
  a.model_fingerprint = m.fingerprint();
  return a;
}

// Random subsample (without replacement) of at most `n` rows.
inline Matrix background_sample(const Matrix& x, std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(x.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(n, idx.size()));
  std::sort(idx.begin(), idx.end());
  return x.select_rows(idx);
}

struct ExplainConfig {
  std::size_t background = 100;
  int n_permutations = 200;
  std::size_t exact_limit = 12;  // exact enumeration up to this many active features
  std::size_t instances = 50;

  void validate() const {
    if (background < 1) throw ConfigError("explain.background must be >= 1");
    if (n_permutations < 10) throw ConfigError("explain.n_permutations must be >= 10");
    if (exact_limit > 20) throw ConfigError("explain.exact_limit must be <= 20");
    if (instances < 1) throw ConfigError("explain.instances must be >= 1");
  }
};

// Explains the first `instances` rows of `x` against a background drawn
// from `pool`: exact when few features are active, sampled otherwise. Each
// instance gets its own derived seed so results do not depend on threads.
inline std::vector<ShapleyAttribution> explain_rows(const Model& m, const Matrix& x, const Matrix& pool,
                                                    const ExplainConfig& cfg, std::uint64_t seed, int threads = 1) {
  cfg.validate();
  const Matrix bg = background_sample(pool, cfg.background, seed);
  const std::size_t n = std::min(cfg.instances, x.rows());
  std::vector<ShapleyAttribution> out(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto xi = x.row(i);
    if (detail::active_features(xi, bg).size() <= cfg.exact_limit)
      out[i] = shapley_exact(m, xi, bg, cfg.exact_limit);
    else
      out[i] = shapley_sampled(m, xi, bg, cfg.n_permutations, mix_seed(seed, i));
  });
  return out;
}

struct BeeswarmPoint {
  std::size_t instance = 0;
  std::size_t feature = 0;
  double value = 0.0;
  double phi = 0.0;
};

struct ImportanceSummary {
  std::vector<std::string> feature_names;
  std::vector<double> mean_abs_phi;
  std::vector<BeeswarmPoint> beeswarm;  // features by descending importance
  std::array<double, kNumDirections> height_importance{};
  std::array<double, kNumDirections> distance_importance{};

  // Feature indices by descending mean |phi|, ties by index.
  std::vector<std::size_t> ranking() const {
    std::vector<std::size_t> r(mean_abs_phi.size());
    std::iota(r.begin(), r.end(), std::size_t{0});
    std::stable_sort(r.begin(), r.end(),
                     [&](std::size_t a, std::size_t b) { return mean_abs_phi[a] > mean_abs_phi[b]; });
    return r;
  }
};

inline ImportanceSummary aggregate_importance(const std::vector<ShapleyAttribution>& attrs) {
  if (attrs.empty()) throw DomainError("aggregate_importance: empty attribution list");
  const auto& fp = attrs.front().model_fingerprint;
  const std::size_t nf = attrs.front().phi.size();
  for (const auto& a : attrs) {
    if (a.model_fingerprint != fp) throw DomainError("aggregate_importance: attributions come from different models");
    if (a.phi.size() != nf) throw DomainError("aggregate_importance: attribution width mismatch");
  }
  ImportanceSummary s;
  s.feature_names = nf == kNumFeatures ? feature_names() : std::vector<std::string>{};
  for (std::size_t f = 0; s.feature_names.size() < nf; ++f) s.feature_names.push_back("f" + std::to_string(f));
  s.mean_abs_phi.assign(nf, 0.0);
  for (const auto& a : attrs)
    for (std::size_t f = 0; f < nf; ++f) s.mean_abs_phi[f] += std::abs(a.phi[f]);
  for (auto& v : s.mean_abs_phi) v /= static_cast<double>(attrs.size());
  for (auto f : s.ranking())
    for (std::size_t i = 0; i < attrs.size(); ++i) s.beeswarm.push_back({i, f, attrs[i].x[f], attrs[i].phi[f]});
  if (nf == kNumFeatures)
    for (int d = 0; d < kNumDirections; ++d) {
      s.height_importance[static_cast<std::size_t>(d)] = s.mean_abs_phi[height_index(d)];
      s.distance_importance[static_cast<std::size_t>(d)] = s.mean_abs_phi[distance_index(d)];
    }
  return s;
}

// Attribution CSV: instance, feature, value, phi, se.
inline std::string attributions_to_csv(const std::vector<ShapleyAttribution>& attrs,
                                       const std::vector<std::int64_t>& ids, const std::string& header_comment = {}) {
  std::ostringstream out;
  if (!header_comment.empty()) out << header_comment << '\n';
  out << "id,feature,value,phi,se\n";
  const auto& names = feature_names();
  for (std::size_t i = 0; i < attrs.size(); ++i)
    for (std::size_t f = 0; f < attrs[i].phi.size(); ++f)
      out << ids.at(i) << ',' << (f < names.size() ? names[f] : "f" + std::to_string(f)) << ','
          << csv::fmt(attrs[i].x[f]) << ',' << csv::fixed(attrs[i].phi[f], 6) << ','
          << csv::fixed(attrs[i].se[f], 6) << '\n';
  return out.str();
}

// Beeswarm table; rank 1 is the most important feature.
inline std::string beeswarm_to_csv(const ImportanceSummary& s, const std::string& header_comment = {}) {
  std::ostringstream out;
  if (!header_comment.empty()) out << header_comment << '\n';
  out << "feature,rank,instance,value,phi\n";
  const auto rank = s.ranking();
  std::vector<std::size_t> pos(rank.size());
  for (std::size_t i = 0; i < rank.size(); ++i) pos[rank[i]] = i;
  for (const auto& p : s.beeswarm)
    out << s.feature_names[p.feature] << ',' << pos[p.feature] + 1 << ',' << p.instance << ',' << csv::fmt(p.value)
        << ',' << csv::fixed(p.phi, 6) << '\n';
  return out.str();
}

// Circular chart table: 8 height rows then 8 distance rows.
inline std::string circular_to_csv(const ImportanceSummary& s, const std::string& header_comment = {}) {
  std::ostringstream out;
  if (!header_comment.empty()) out << header_comment << '\n';
  out << "group,direction,feature,mean_abs_phi\n";
  for (int d = 0; d < kNumDirections; ++d)
    out << "height," << kDirectionNames[static_cast<std::size_t>(d)] << ",h"
        << kDirectionNames[static_cast<std::size_t>(d)] << ','
        << csv::fixed(s.height_importance[static_cast<std::size_t>(d)], 6) << '\n';
  for (int d = 0; d < kNumDirections; ++d)
    out << "distance," << kDirectionNames[static_cast<std::size_t>(d)] << ",d"
        << kDirectionNames[static_cast<std::size_t>(d)] << ','
        << csv::fixed(s.distance_importance[static_cast<std::size_t>(d)], 6) << '\n';
  return out.str();
}

}  // namespace urbancfx
