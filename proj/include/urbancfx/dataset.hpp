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

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "urbancfx/csv.hpp"
#include "urbancfx/scenario.hpp"
#include "urbancfx/simulate.hpp"

namespace urbancfx {

struct DatasetRow {
  UrbanScenario scenario;
  std::optional<double> svf;
  std::optional<double> visibility;
  std::optional<int> visibility_class;

  bool complete() const { return svf && visibility && visibility_class; }
};

// Tabular dataset in CSV column order. Absent distances are imputed with
// kAbsentDistance when a feature matrix is requested.
struct Dataset {
  std::vector<DatasetRow> rows;

  std::size_t size() const { return rows.size(); }

  Matrix features() const {
    Matrix m;
    for (const auto& r : rows) m.push_row(r.scenario.features());
    if (rows.empty()) m = Matrix(0, kNumFeatures);
    return m;
  }

  std::vector<double> svf_targets() const {
    std::vector<double> y;
    for (const auto& r : rows) {
      if (!r.svf) throw DomainError("dataset row " + std::to_string(r.scenario.id) + " lacks svf");
      y.push_back(*r.svf);
    }
    return y;
  }

  std::vector<double> class_targets() const {
    std::vector<double> y;
    for (const auto& r : rows) {
      if (!r.visibility_class)
        throw DomainError("dataset row " + std::to_string(r.scenario.id) + " lacks visibility class");
      y.push_back(*r.visibility_class);
    }
    return y;
  }

  std::vector<double> visibility_targets() const {
    std::vector<double> y;
    for (const auto& r : rows) y.push_back(r.visibility.value_or(0.0));
    return y;
  }

  // Rows with every target present.
  Dataset complete_rows() const {
    Dataset d;
    for (const auto& r : rows)
      if (r.complete()) d.rows.push_back(r);
    return d;
  }

  Dataset subset(std::span<const std::size_t> idx) const {
    Dataset d;
    d.rows.reserve(idx.size());
    for (auto i : idx) d.rows.push_back(rows[i]);
    return d;
  }

  // Column-wise (min, max) over the feature matrix.
  std::vector<std::pair<double, double>> feature_ranges() const {
    std::vector<std::pair<double, double>> out(kNumFeatures, {0.0, 0.0});
    const Matrix m = features();
    for (std::size_t c = 0; c < kNumFeatures; ++c)
      for (std::size_t r = 0; r < m.rows(); ++r) {
        if (r == 0 || m(r, c) < out[c].first) out[c].first = m(r, c);
        if (r == 0 || m(r, c) > out[c].second) out[c].second = m(r, c);
      }
    return out;
  }
};

inline std::vector<std::string> dataset_header() {
  std::vector<std::string> h = {"id"};
  h.insert(h.end(), feature_names().begin(), feature_names().end());
  h.insert(h.end(), {"svf_pct", "visibility_pct", "visibility_class"});
  return h;
}

inline std::string dataset_to_csv(const Dataset& d, const std::string& header_comment = {}) {
  std::ostringstream out;
  if (!header_comment.empty()) out << header_comment << '\n';
  out << csv::join(dataset_header()) << '\n';
  for (const auto& r : d.rows) {
    const auto& s = r.scenario;
    std::vector<std::string> f = {std::to_string(s.id), csv::fmt(s.orientation_deg),
                                  csv::fmt(s.street_width), csv::fmt(s.building_width),
                                  csv::fmt(s.building_length), csv::fmt(s.park_area)};
    for (int k = 0; k < kNumDirections; ++k) f.push_back(std::to_string(s.heights[k]));
    for (int k = 0; k < kNumDirections; ++k)
      f.push_back(s.heights[k] > 0 ? csv::fmt_opt(s.distances[k]) : std::string());
    f.push_back(csv::fmt_opt(r.svf));
    f.push_back(csv::fmt_opt(r.visibility));
    f.push_back(r.visibility_class ? std::to_string(*r.visibility_class) : std::string());
    out << csv::join(f) << '\n';
  }
  return out.str();
}

inline Dataset dataset_from_table(const csv::Table& t) {
  const auto header = dataset_header();
  if (t.header != header) throw IoError("dataset CSV header does not match the expected schema");
  Dataset d;
  for (const auto& f : t.rows) {
    DatasetRow r;
    auto& s = r.scenario;
    s.id = static_cast<std::int64_t>(csv::parse_double(f[0], "id"));
    s.orientation_deg = csv::parse_double(f[1], "orientation_deg");
    s.street_width = csv::parse_double(f[2], "street_width_m");
    s.building_width = csv::parse_double(f[3], "building_width_m");
    s.building_length = csv::parse_double(f[4], "building_length_m");
    s.park_area = csv::parse_double(f[5], "park_area_m2");
    for (int k = 0; k < kNumDirections; ++k) {
      s.heights[k] = static_cast<int>(csv::parse_double(f[6 + k], "height"));
      s.distances[k] = csv::parse_opt(f[14 + k], "distance");
    }
    r.svf = csv::parse_opt(f[22], "svf_pct");
    r.visibility = csv::parse_opt(f[23], "visibility_pct");
    if (auto c = csv::parse_opt(f[24], "visibility_class")) r.visibility_class = static_cast<int>(*c);
    d.rows.push_back(std::move(r));
  }
  return d;
}

inline Dataset read_dataset(const std::string& path) { return dataset_from_table(csv::read(path)); }

// Simulates every scene; row order follows the input. Scenes without
// window points keep svf but leave visibility empty (row incomplete).
inline Dataset simulate_dataset(const std::vector<std::pair<UrbanScenario, Scene>>& pairs,
                                const SamplerConfig& cfg = {}, int threads = 1) {
  if (pairs.empty()) throw DomainError("simulate_dataset: empty scenario list");
  cfg.validate();
  Dataset d;
  d.rows.resize(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    const auto& [scenario, scene] = pairs[i];
    SimulationResult res;
    try {
      res = simulate_scene(scene, cfg);
    } catch (const DomainError& e) {
      throw DomainError("scenario " + std::to_string(scenario.id) + ": " + e.what());
    }
    DatasetRow& r = d.rows[i];
    r.scenario = scenario;
    r.svf = res.svf;
    if (res.valid) {
      r.visibility = res.visibility;
      r.visibility_class = res.visibility_class;
    }
  });
  return d;
}

}  // namespace urbancfx
