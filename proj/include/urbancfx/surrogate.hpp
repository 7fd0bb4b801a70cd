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

// Dataset-level training, splitting, evaluation and model persistence.

#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "urbancfx/csv.hpp"
#include "urbancfx/dataset.hpp"
#include "urbancfx/gbdt.hpp"
#include "urbancfx/knn.hpp"

namespace urbancfx {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Shuffled partition with |train| = round(ratio * n).
inline SplitIndices split_indices(std::size_t n, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw DomainError("split: ratio must be in (0,1)");
  if (n < 10) throw DomainError("split: need at least 10 rows");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto ntrain = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  SplitIndices s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<long>(ntrain));
  s.test.assign(idx.begin() + static_cast<long>(ntrain), idx.end());
  return s;
}

inline std::pair<Dataset, Dataset> split(const Dataset& d, double ratio, std::uint64_t seed) {
  const auto s = split_indices(d.size(), ratio, seed);
  return {d.subset(s.train), d.subset(s.test)};
}

inline std::vector<double> targets_for(const Dataset& d, TaskMode mode) {
  return mode == TaskMode::kRegression ? d.svf_targets() : d.class_targets();
}

inline TreeEnsemble train_gbdt(const Dataset& train, const TrainConfig& cfg, TaskMode mode) {
  const auto y = targets_for(train, mode);
  return train_gbdt(train.features(), y, cfg, mode, feature_names());
}

inline KnnModel train_knn(const Dataset& train, const TrainConfig& cfg, TaskMode mode) {
  cfg.validate();
  return train_knn(train.features(), targets_for(train, mode), cfg.knn_k, mode, feature_names());
}

struct Metrics {
  TaskMode mode = TaskMode::kRegression;
  std::size_t n = 0;
  double r2 = 0.0, mse = 0.0, mae = 0.0;
  double accuracy = 0.0;
  std::array<double, kNumClasses> f1{};
};

inline Metrics regression_metrics(std::span<const double> y, std::span<const double> yhat) {
  if (y.empty() || y.size() != yhat.size()) throw DomainError("evaluate: mismatched or empty targets");
  Metrics m;
  m.n = y.size();
  const double n = static_cast<double>(y.size());
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sse = 0.0, sst = 0.0, sae = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = yhat[i] - y[i];
    sse += e * e;
    sae += std::abs(e);
    sst += (y[i] - mean) * (y[i] - mean);
  }
  m.mse = sse / n;
  m.mae = sae / n;
  m.r2 = sst > 0 ? 1.0 - sse / sst : (sse == 0 ? 1.0 : 0.0);
  return m;
}

inline Metrics classification_metrics(std::span<const int> y, std::span<const int> yhat) {
  if (y.empty() || y.size() != yhat.size()) throw DomainError("evaluate: mismatched or empty targets");
  Metrics m;
  m.mode = TaskMode::kMulticlass;
  m.n = y.size();
  std::size_t correct = 0;
  std::array<std::size_t, kNumClasses> tp{}, fp{}, fn{};
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == yhat[i]) {
      ++correct;
      ++tp[static_cast<std::size_t>(y[i])];
    } else {
      ++fp[static_cast<std::size_t>(yhat[i])];
      ++fn[static_cast<std::size_t>(y[i])];
    }
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(y.size());
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const double p = tp[k] + fp[k] ? static_cast<double>(tp[k]) / static_cast<double>(tp[k] + fp[k]) : 0.0;
    const double r = tp[k] + fn[k] ? static_cast<double>(tp[k]) / static_cast<double>(tp[k] + fn[k]) : 0.0;
    m.f1[k] = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  return m;
}

inline Metrics evaluate(const Model& model, const Dataset& test) {
  if (test.size() == 0) throw DomainError("evaluate: empty test set");
  const auto preds = model.predict_batch(test.features());
  if (model.mode() == TaskMode::kRegression) {
    const auto y = test.svf_targets();
    std::vector<double> yhat;
    for (const auto& p : preds) yhat.push_back(p.value);
    return regression_metrics(y, yhat);
  }
  std::vector<int> y, yhat;
  for (double v : test.class_targets()) y.push_back(static_cast<int>(v));
  for (const auto& p : preds) yhat.push_back(p.label);
  return classification_metrics(y, yhat);
}

// One row per (model, task) mirroring the comparison tables.
struct MetricsRow {
  std::string model;
  std::string task;  // "svf" or "visibility"
  Metrics metrics;
};

inline std::vector<std::string> metrics_header() {
  return {"model", "task", "n", "r2", "mse", "mae", "accuracy", "f1_class0", "f1_class1", "f1_class2"};
}

inline std::string metrics_to_csv(const std::vector<MetricsRow>& rows, const std::string& header_comment = {}) {
  std::ostringstream out;
  if (!header_comment.empty()) out << header_comment << '\n';
  out << csv::join(metrics_header()) << '\n';
  for (const auto& r : rows) {
    const auto& m = r.metrics;
    const bool reg = m.mode == TaskMode::kRegression;
    auto opt = [](bool on, double v) { return on ? csv::fixed(v, 6) : std::string(); };
    out << csv::join({r.model, r.task, std::to_string(m.n), opt(reg, m.r2), opt(reg, m.mse), opt(reg, m.mae),
                      opt(!reg, m.accuracy), opt(!reg, m.f1[0]), opt(!reg, m.f1[1]), opt(!reg, m.f1[2])})
        << '\n';
  }
  return out.str();
}

// Loads either model kind from its JSON file representation.
inline std::unique_ptr<Model> model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw IoError("model JSON lacks 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "gbdt") return std::make_unique<TreeEnsemble>(TreeEnsemble::from_json(j));
  if (kind == "knn") return std::make_unique<KnnModel>(KnnModel::from_json(j));
  throw IoError("unknown model kind '" + kind + "'");
}

inline std::unique_ptr<Model> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace urbancfx
