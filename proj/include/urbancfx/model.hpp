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

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "urbancfx/common.hpp"

namespace urbancfx {

enum class TaskMode { kRegression, kMulticlass };

inline constexpr int kNumClasses = 3;

inline std::string to_string(TaskMode m) {
  return m == TaskMode::kRegression ? "regression" : "multiclass";
}

inline TaskMode task_mode_from_string(const std::string& s) {
  if (s == "regression") return TaskMode::kRegression;
  if (s == "multiclass") return TaskMode::kMulticlass;
  throw IoError("unknown model mode '" + s + "'");
}

struct Prediction {
  double value = 0.0;                      // regression output
  int label = -1;                          // argmax class (multiclass)
  std::array<double, kNumClasses> proba{};  // softmax / vote shares
  std::array<double, kNumClasses> raw{};    // pre-softmax scores
};

// Common surface of every trained surrogate. Implementations are immutable
// after training, so concurrent predict() calls are safe.
class Model {
 public:
  virtual ~Model() = default;
  virtual TaskMode mode() const = 0;
  virtual std::size_t num_features() const = 0;
  virtual Prediction predict(std::span<const double> x) const = 0;
  // Stable identity of the trained parameters.
  virtual std::string fingerprint() const = 0;

  // Per output slot (regression value, or raw class score), bounds on the
  // output over the box lo <= x <= hi. Models without such a bound return
  // nullopt.
  using OutputRange = std::vector<std::pair<double, double>>;
  virtual std::optional<OutputRange> output_range(std::span<const double> lo,
                                                  std::span<const double> hi) const {
    (void)lo;
    (void)hi;
    return std::nullopt;
  }

  std::vector<Prediction> predict_batch(const Matrix& x) const {
    std::vector<Prediction> out;
    out.reserve(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out.push_back(predict(x.row(r)));
    return out;
  }

 protected:
  void check_width(std::span<const double> x) const {
    if (x.size() != num_features())
      throw DomainError("predict: expected " + std::to_string(num_features()) + " features, got " +
                        std::to_string(x.size()));
  }
};

// Scalar view of a model used by the explainers and optimizers: the
// regression output, or the raw score of one class.
inline double model_score(const Model& m, std::span<const double> x, int cls = -1) {
  const Prediction p = m.predict(x);
  if (m.mode() == TaskMode::kRegression) return p.value;
  return p.raw[static_cast<std::size_t>(cls < 0 ? p.label : cls)];
}

struct TrainConfig {
  double learning_rate = 0.1;
  int max_depth = 5;
  int n_estimators = 50;
  double subsample = 0.8;
  double colsample = 0.9;
  double split_ratio = 0.8;
  // L2 penalty on leaf weights. Unset: 0 for regression (plain variance
  // reduction), 1 for multiclass.
  std::optional<double> reg_lambda;
  double min_child_weight = 1.0;
  int knn_k = 5;
  std::uint64_t seed = 7;

  double lambda_for(TaskMode m) const {
    return reg_lambda.value_or(m == TaskMode::kRegression ? 0.0 : 1.0);
  }

  void validate() const {
    if (!(learning_rate > 0 && learning_rate <= 1)) throw ConfigError("train.learning_rate must be in (0,1]");
    if (max_depth < 0) throw ConfigError("train.max_depth must be >= 0");
    if (n_estimators < 0) throw ConfigError("train.n_estimators must be >= 0");
    if (!(subsample > 0 && subsample <= 1)) throw ConfigError("train.subsample must be in (0,1]");
    if (!(colsample > 0 && colsample <= 1)) throw ConfigError("train.colsample must be in (0,1]");
    if (!(split_ratio > 0 && split_ratio < 1)) throw ConfigError("train.split_ratio must be in (0,1)");
    if (reg_lambda && *reg_lambda < 0) throw ConfigError("train.reg_lambda must be >= 0");
    if (knn_k < 1) throw ConfigError("train.knn_k must be >= 1");
  }
};

}  // namespace urbancfx
