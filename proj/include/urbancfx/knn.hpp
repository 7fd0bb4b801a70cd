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

// Distance-weighted k-nearest-neighbour baseline over min-max normalized
// features.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "urbancfx/kdtree.hpp"
#include "urbancfx/model.hpp"

namespace urbancfx {

class KnnModel : public Model {
 public:
  static constexpr int kFormatVersion = 1;

  KnnModel() = default;

  KnnModel(const Matrix& x, std::vector<double> y, int k, TaskMode mode)
      : mode_(mode), k_(k), y_(std::move(y)), dim_(x.cols()) {
    if (x.rows() == 0) throw DomainError("train_knn: empty training set");
    if (y_.size() != x.rows()) throw DomainError("train_knn: target length mismatch");
    if (k_ < 1) throw DomainError("train_knn: k must be >= 1");
    if (static_cast<std::size_t>(k_) > x.rows())
      throw DomainError("train_knn: k=" + std::to_string(k_) + " exceeds training size " +
                        std::to_string(x.rows()));
    if (mode_ == TaskMode::kMulticlass)
      for (double v : y_)
        if (v != 0.0 && v != 1.0 && v != 2.0) throw DomainError("train_knn: labels must be 0, 1 or 2");
    lo_.assign(dim_, 0.0);
    hi_.assign(dim_, 0.0);
    for (std::size_t c = 0; c < dim_; ++c) {
      lo_[c] = hi_[c] = x(0, c);
      for (std::size_t r = 1; r < x.rows(); ++r) {
        lo_[c] = std::min(lo_[c], x(r, c));
        hi_[c] = std::max(hi_[c], x(r, c));
      }
    }
    raw_ = x.data();
    rebuild();
  }

  TaskMode mode() const override { return mode_; }
  std::size_t num_features() const override { return dim_; }
  int k() const { return k_; }

  std::vector<double> normalize(std::span<const double> x) const {
    std::vector<double> out(dim_);
    for (std::size_t c = 0; c < dim_; ++c) {
      const double span = hi_[c] - lo_[c];
      out[c] = span > 0 ? (x[c] - lo_[c]) / span : 0.0;
    }
    return out;
  }

  // Inverse-distance weights; any neighbour at distance 0 takes all the
  // weight (shared equally among zero-distance neighbours).
  Prediction predict(std::span<const double> x) const override {
    check_width(x);
    const auto q = normalize(x);
    const auto nn = tree_.knn(q, static_cast<std::size_t>(k_));
    std::vector<double> w(nn.size());
    const bool exact = std::any_of(nn.begin(), nn.end(), [](const Neighbor& n) { return n.cost == 0.0; });
    for (std::size_t i = 0; i < nn.size(); ++i)
      w[i] = exact ? (nn[i].cost == 0.0 ? 1.0 : 0.0) : 1.0 / nn[i].cost;
    double wsum = 0.0;
    for (double v : w) wsum += v;

    Prediction p;
    if (mode_ == TaskMode::kRegression) {
      double acc = 0.0;
      for (std::size_t i = 0; i < nn.size(); ++i) acc += w[i] * y_[nn[i].index];
      p.value = acc / wsum;
      return p;
    }
    for (std::size_t i = 0; i < nn.size(); ++i)
      p.proba[static_cast<std::size_t>(y_[nn[i].index])] += w[i] / wsum;
    p.raw = p.proba;
    p.label = static_cast<int>(std::max_element(p.proba.begin(), p.proba.end()) - p.proba.begin());
    p.value = p.label;
    return p;
  }

  std::string fingerprint() const override { return hex64(fnv1a(to_json().dump())); }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "knn";
    j["mode"] = to_string(mode_);
    j["k"] = k_;
    j["feature_names"] = feature_names_;
    j["min"] = lo_;
    j["max"] = hi_;
    j["x"] = raw_;
    j["y"] = y_;
    return j;
  }

  static KnnModel from_json(const nlohmann::json& j) {
    try {
      if (j.at("format_version").get<int>() != kFormatVersion)
        throw IoError("unsupported model format_version");
      if (j.at("kind").get<std::string>() != "knn") throw IoError("model file is not a knn model");
      KnnModel m;
      m.mode_ = task_mode_from_string(j.at("mode").get<std::string>());
      m.k_ = j.at("k").get<int>();
      m.feature_names_ = j.at("feature_names").get<std::vector<std::string>>();
      m.lo_ = j.at("min").get<std::vector<double>>();
      m.hi_ = j.at("max").get<std::vector<double>>();
      m.raw_ = j.at("x").get<std::vector<double>>();
      m.y_ = j.at("y").get<std::vector<double>>();
      m.dim_ = m.lo_.size();
      if (m.dim_ == 0 || m.hi_.size() != m.dim_ || m.raw_.size() != m.y_.size() * m.dim_ ||
          m.k_ < 1 || static_cast<std::size_t>(m.k_) > m.y_.size())
        throw IoError("model: inconsistent knn payload");
      m.rebuild();
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("malformed model JSON: ") + e.what());
    }
  }

  std::vector<std::string> feature_names_;

 private:
  void rebuild() {
    std::vector<double> pts;
    pts.reserve(raw_.size());
    for (std::size_t r = 0; r < y_.size(); ++r) {
      const auto n = normalize({raw_.data() + r * dim_, dim_});
      pts.insert(pts.end(), n.begin(), n.end());
    }
    tree_ = KdTree(std::move(pts), dim_);
  }

  TaskMode mode_ = TaskMode::kRegression;
  int k_ = 5;
  std::vector<double> y_;
  std::size_t dim_ = 0;
  std::vector<double> lo_, hi_;
  std::vector<double> raw_;
  KdTree tree_;
};

inline KnnModel train_knn(const Matrix& x, std::vector<double> y, int k, TaskMode mode,
                          std::vector<std::string> names = {}) {
  KnnModel m(x, std::move(y), k, mode);
  m.feature_names_ = std::move(names);
  return m;
}

}  // namespace urbancfx
