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

// Gradient-boosted decision trees: squared-loss regression and softmax
// multiclass boosting with exact greedy split finding.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "urbancfx/model.hpp"

namespace urbancfx {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  int output = 0;  // class index for multiclass, 0 for regression
  std::vector<TreeNode> nodes;

  // x[feature] < threshold goes left.
  double predict(std::span<const double> x) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      i = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
  }

  int depth() const {
    std::vector<std::pair<int, int>> stack = {{0, 0}};
    int best = 0;
    while (!stack.empty()) {
      auto [i, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      const auto& n = nodes[static_cast<std::size_t>(i)];
      if (!n.is_leaf()) {
        stack.push_back({n.left, d + 1});
        stack.push_back({n.right, d + 1});
      }
    }
    return best;
  }
};

inline std::array<double, kNumClasses> softmax(const std::array<double, kNumClasses>& raw) {
  const double m = *std::max_element(raw.begin(), raw.end());
  std::array<double, kNumClasses> p{};
  double s = 0.0;
  for (int k = 0; k < kNumClasses; ++k) s += p[k] = std::exp(raw[k] - m);
  for (auto& v : p) v /= s;
  return p;
}

class TreeEnsemble : public Model {
 public:
  static constexpr int kFormatVersion = 1;

  TaskMode mode_ = TaskMode::kRegression;
  std::vector<double> base_score;  // 1 entry (regression) or kNumClasses
  std::vector<std::string> feature_names;
  std::vector<Tree> trees;
  TrainConfig train_config;

  TaskMode mode() const override { return mode_; }
  std::size_t num_features() const override { return feature_names.size(); }

  Prediction predict(std::span<const double> x) const override {
    check_width(x);
    Prediction p;
    if (mode_ == TaskMode::kRegression) {
      double v = base_score.at(0);
      for (const auto& t : trees) v += t.predict(x);
      p.value = v;
      return p;
    }
    for (int k = 0; k < kNumClasses; ++k) p.raw[k] = base_score.at(static_cast<std::size_t>(k));
    for (const auto& t : trees) p.raw[static_cast<std::size_t>(t.output)] += t.predict(x);
    p.proba = softmax(p.raw);
    p.label = static_cast<int>(std::max_element(p.proba.begin(), p.proba.end()) - p.proba.begin());
    p.value = p.label;
    return p;
  }

  std::string fingerprint() const override { return hex64(fnv1a(to_json().dump())); }

  std::optional<OutputRange> output_range(std::span<const double> lo,
                                          std::span<const double> hi) const override {
    check_width(lo);
    check_width(hi);
    OutputRange r;
    for (double b : base_score) r.push_back({b, b});
    std::vector<int> stack;
    for (const auto& t : trees) {
      double tlo = std::numeric_limits<double>::infinity(), thi = -tlo;
      stack.assign(1, 0);
      while (!stack.empty()) {
        const auto& n = t.nodes[static_cast<std::size_t>(stack.back())];
        stack.pop_back();
        if (n.is_leaf()) {
          tlo = std::min(tlo, n.value);
          thi = std::max(thi, n.value);
          continue;
        }
        const auto f = static_cast<std::size_t>(n.feature);
        if (lo[f] < n.threshold) stack.push_back(n.left);
        if (hi[f] >= n.threshold) stack.push_back(n.right);
      }
      auto& slot = r[static_cast<std::size_t>(t.output)];
      slot.first += tlo;
      slot.second += thi;
    }
    return r;
  }

  // Features referenced by at least one split.
  std::vector<bool> used_features() const {
    std::vector<bool> used(num_features(), false);
    for (const auto& t : trees)
      for (const auto& n : t.nodes)
        if (!n.is_leaf()) used[static_cast<std::size_t>(n.feature)] = true;
    return used;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "gbdt";
    j["mode"] = to_string(mode_);
    j["base_score"] = base_score;
    j["feature_names"] = feature_names;
    j["train_config"] = {{"learning_rate", train_config.learning_rate},
                         {"max_depth", train_config.max_depth},
                         {"n_estimators", train_config.n_estimators},
                         {"subsample", train_config.subsample},
                         {"colsample", train_config.colsample},
                         {"reg_lambda", train_config.lambda_for(mode_)},
                         {"min_child_weight", train_config.min_child_weight}};
    j["seed"] = train_config.seed;
    auto& arr = j["trees"] = nlohmann::ordered_json::array();
    for (const auto& t : trees) {
      nlohmann::ordered_json jt;
      jt["output"] = t.output;
      auto& nodes = jt["nodes"] = nlohmann::ordered_json::array();
      for (const auto& n : t.nodes) {
        if (n.is_leaf())
          nodes.push_back({{"leaf", n.value}});
        else
          nodes.push_back({{"f", n.feature}, {"t", n.threshold}, {"l", n.left}, {"r", n.right}});
      }
      arr.push_back(std::move(jt));
    }
    return j;
  }

  static TreeEnsemble from_json(const nlohmann::json& j) {
    try {
      if (j.at("format_version").get<int>() != kFormatVersion)
        throw IoError("unsupported model format_version");
      if (j.at("kind").get<std::string>() != "gbdt") throw IoError("model file is not a gbdt model");
      TreeEnsemble m;
      m.mode_ = task_mode_from_string(j.at("mode").get<std::string>());
      m.base_score = j.at("base_score").get<std::vector<double>>();
      m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
      const auto& tc = j.at("train_config");
      m.train_config.learning_rate = tc.at("learning_rate").get<double>();
      m.train_config.max_depth = tc.at("max_depth").get<int>();
      m.train_config.n_estimators = tc.at("n_estimators").get<int>();
      m.train_config.subsample = tc.at("subsample").get<double>();
      m.train_config.colsample = tc.at("colsample").get<double>();
      m.train_config.reg_lambda = tc.at("reg_lambda").get<double>();
      m.train_config.min_child_weight = tc.at("min_child_weight").get<double>();
      m.train_config.seed = j.at("seed").get<std::uint64_t>();
      for (const auto& jt : j.at("trees")) {
        Tree t;
        t.output = jt.at("output").get<int>();
        for (const auto& jn : jt.at("nodes")) {
          TreeNode n;
          if (jn.contains("leaf")) {
            n.value = jn.at("leaf").get<double>();
          } else {
            n.feature = jn.at("f").get<int>();
            n.threshold = jn.at("t").get<double>();
            n.left = jn.at("l").get<int>();
            n.right = jn.at("r").get<int>();
          }
          t.nodes.push_back(n);
        }
        m.trees.push_back(std::move(t));
      }
      m.validate();
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("malformed model JSON: ") + e.what());
    }
  }

  void validate() const {
    const std::size_t expect_base = mode_ == TaskMode::kRegression ? 1 : kNumClasses;
    if (base_score.size() != expect_base) throw IoError("model: wrong base_score arity");
    for (const auto& t : trees) {
      if (t.nodes.empty()) throw IoError("model: empty tree");
      for (const auto& n : t.nodes) {
        if (!n.is_leaf()) {
          if (static_cast<std::size_t>(n.feature) >= num_features())
            throw IoError("model: split feature index out of range");
          const auto sz = static_cast<int>(t.nodes.size());
          if (n.left <= 0 || n.right <= 0 || n.left >= sz || n.right >= sz)
            throw IoError("model: child index out of range");
        } else if (!std::isfinite(n.value)) {
          throw IoError("model: non-finite leaf value");
        }
      }
    }
  }
};

namespace detail {

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> grad, std::span<const double> hess,
              const std::vector<std::size_t>& features, double lambda, double min_child_weight,
              double learning_rate, int max_depth)
      : x_(x),
        grad_(grad),
        hess_(hess),
        features_(features),
        lambda_(lambda),
        min_child_weight_(min_child_weight),
        lr_(learning_rate),
        max_depth_(max_depth) {}

  Tree build(std::vector<std::size_t> rows, int output) {
    Tree t;
    t.output = output;
    t.nodes.emplace_back();
    grow(t, 0, rows, 0);
    return t;
  }

 private:
  double leaf_weight(double g, double h) const { return -g / (h + lambda_); }
  double score(double g, double h) const { return g * g / (h + lambda_); }

  void grow(Tree& t, std::size_t node, std::vector<std::size_t>& rows, int depth) {
    double g = 0.0, h = 0.0;
    for (auto r : rows) {
      g += grad_[r];
      h += hess_[r];
    }
    t.nodes[node].value = lr_ * leaf_weight(g, h);
    if (depth >= max_depth_ || rows.size() < 2) return;

    const SplitCandidate best = find_split(rows, g, h);
    if (best.feature < 0) return;

    std::vector<std::size_t> left, right;
    for (auto r : rows)
      (x_(r, static_cast<std::size_t>(best.feature)) < best.threshold ? left : right).push_back(r);
    const auto li = t.nodes.size();
    t.nodes.emplace_back();
    const auto ri = t.nodes.size();
    t.nodes.emplace_back();
    t.nodes[node].feature = best.feature;
    t.nodes[node].threshold = best.threshold;
    t.nodes[node].left = static_cast<int>(li);
    t.nodes[node].right = static_cast<int>(ri);
    t.nodes[node].value = 0.0;
    rows.clear();
    rows.shrink_to_fit();
    grow(t, li, left, depth + 1);
    grow(t, ri, right, depth + 1);
  }

  // Exact greedy scan over sorted values of every sampled feature. Ties
  // keep the earliest (lowest feature, lowest threshold) candidate.
  SplitCandidate find_split(const std::vector<std::size_t>& rows, double g, double h) const {
    SplitCandidate best;
    const double parent = score(g, h);
    std::vector<std::size_t> order(rows);
    for (auto f : features_) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = x_(a, f), vb = x_(b, f);
        return va != vb ? va < vb : a < b;
      });
      double gl = 0.0, hl = 0.0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        gl += grad_[order[i]];
        hl += hess_[order[i]];
        const double v = x_(order[i], f), vn = x_(order[i + 1], f);
        if (v == vn) continue;
        const double gr = g - gl, hr = h - hl;
        if (hl < min_child_weight_ || hr < min_child_weight_) continue;
        const double gain = score(gl, hl) + score(gr, hr) - parent;
        if (gain > best.gain + 1e-12 * std::max(1.0, std::abs(parent))) {
          double thr = v + (vn - v) / 2;
          if (!(thr > v)) thr = vn;
          best = {gain, static_cast<int>(f), thr};
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  const std::vector<std::size_t>& features_;
  double lambda_;
  double min_child_weight_;
  double lr_;
  int max_depth_;
};

inline std::vector<std::size_t> sample_indices(std::size_t n, double fraction, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (fraction >= 1.0) return idx;
  const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fraction * n)));
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace detail

// Trains a boosted ensemble on a feature matrix. For multiclass, `y` holds
// class labels 0..2 and every round adds one tree per class.
inline TreeEnsemble train_gbdt(const Matrix& x, std::span<const double> y, const TrainConfig& cfg,
                               TaskMode mode, std::vector<std::string> names = {}) {
  cfg.validate();
  if (x.rows() == 0) throw DomainError("train_gbdt: empty training set");
  if (y.size() != x.rows()) throw DomainError("train_gbdt: target length mismatch");
  if (names.empty())
    for (std::size_t c = 0; c < x.cols(); ++c) names.push_back("f" + std::to_string(c));
  if (names.size() != x.cols()) throw DomainError("train_gbdt: feature name count mismatch");

  TreeEnsemble m;
  m.mode_ = mode;
  m.feature_names = std::move(names);
  m.train_config = cfg;
  m.train_config.reg_lambda = cfg.lambda_for(mode);
  const std::size_t n = x.rows();
  const double lambda = cfg.lambda_for(mode);
  std::mt19937_64 rng(cfg.seed);

  auto column_sample = [&] { return detail::sample_indices(x.cols(), cfg.colsample, rng); };

  if (mode == TaskMode::kRegression) {
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    m.base_score = {mean};
    if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) {
      m.base_score = {y[0]};
      return m;
    }
    std::vector<double> pred(n, mean), grad(n), hess(n, 1.0);
    for (int round = 0; round < cfg.n_estimators; ++round) {
      for (std::size_t i = 0; i < n; ++i) grad[i] = pred[i] - y[i];
      const auto rows = detail::sample_indices(n, cfg.subsample, rng);
      const auto feats = column_sample();
      detail::TreeBuilder builder(x, grad, hess, feats, lambda, cfg.min_child_weight,
                                  cfg.learning_rate, cfg.max_depth);
      Tree t = builder.build(rows, 0);
      for (std::size_t i = 0; i < n; ++i) pred[i] += t.predict(x.row(i));
      m.trees.push_back(std::move(t));
    }
    return m;
  }

  std::array<std::size_t, kNumClasses> counts{};
  for (double v : y) {
    const long c = std::lround(v);
    if (c < 0 || c >= kNumClasses || static_cast<double>(c) != v)
      throw DomainError("train_gbdt: multiclass labels must be 0, 1 or 2");
    ++counts[static_cast<std::size_t>(c)];
  }
  if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2)
    throw DomainError("train_gbdt: classifier training set contains a single class");
  m.base_score.resize(kNumClasses);
  for (int k = 0; k < kNumClasses; ++k) {
    const double p = std::max(1e-6, static_cast<double>(counts[k]) / static_cast<double>(n));
    m.base_score[static_cast<std::size_t>(k)] = std::log(p);
  }
  std::vector<std::array<double, kNumClasses>> raw(n);
  for (auto& r : raw)
    for (int k = 0; k < kNumClasses; ++k) r[k] = m.base_score[static_cast<std::size_t>(k)];
  std::vector<double> grad(n), hess(n);
  for (int round = 0; round < cfg.n_estimators; ++round) {
    std::vector<std::array<double, kNumClasses>> prob(n);
    for (std::size_t i = 0; i < n; ++i) prob[i] = softmax(raw[i]);
    const auto rows = detail::sample_indices(n, cfg.subsample, rng);
    for (int k = 0; k < kNumClasses; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        const double p = prob[i][k];
        grad[i] = p - (std::lround(y[i]) == k ? 1.0 : 0.0);
        hess[i] = std::max(p * (1.0 - p), 1e-16);
      }
      const auto feats = column_sample();
      detail::TreeBuilder builder(x, grad, hess, feats, lambda, cfg.min_child_weight,
                                  cfg.learning_rate, cfg.max_depth);
      Tree t = builder.build(rows, k);
      for (std::size_t i = 0; i < n; ++i) raw[i][k] += t.predict(x.row(i));
      m.trees.push_back(std::move(t));
    }
  }
  return m;
}

}  // namespace urbancfx
