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

// Geometric oracle: sky view factor and park visibility by ray casting
// against the building boxes of a Scene.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "urbancfx/common.hpp"
#include "urbancfx/geometry.hpp"
#include "urbancfx/scenario.hpp"

namespace urbancfx {

struct SamplerConfig {
  int hemisphere_rays = 1450;
  double grid_resolution = 1.0;
  double eval_height = 0.1;
  double window_height = 1.5;
  bool cosine_weighted = false;

  void validate() const {
    if (hemisphere_rays < 100) throw ConfigError("sampler.hemisphere_rays must be >= 100");
    if (!(grid_resolution > 0)) throw ConfigError("sampler.grid_resolution must be positive");
    if (eval_height < 0 || window_height < 0)
      throw ConfigError("sampler heights must be non-negative");
  }
};

struct SimulationResult {
  double svf = 0.0;         // percent
  double visibility = 0.0;  // percent
  int visibility_class = 0;
  bool valid = true;        // false when the scene has no window points
};

// Level boundaries at 50 and 75 percent, half-open at the lower bound.
// Values under 30 fold into class 0.
inline int classify_visibility(double v) {
  if (!(v >= 0.0 && v <= 100.0)) throw DomainError("classify_visibility: value outside [0,100]");
  if (v < 50.0) return 0;
  if (v < 75.0) return 1;
  return 2;
}

// Deterministic stratified hemisphere: equal-solid-angle cells on an
// azimuth x cos(zenith) grid, one ray through each cell centre.
class HemisphereRays {
 public:
  explicit HemisphereRays(int count, bool cosine_weighted = false) {
    const double target = std::sqrt(count / 2.0);
    int zen = 1;
    for (int d = 1; d <= count; ++d)
      if (count % d == 0 && std::abs(d - target) < std::abs(zen - target)) zen = d;
    n_zenith_ = zen;
    n_azimuth_ = count / zen;
    azimuth_dirs_.resize(static_cast<std::size_t>(n_azimuth_));
    for (int a = 0; a < n_azimuth_; ++a) {
      const double phi = 2.0 * std::numbers::pi * (a + 0.5) / n_azimuth_;
      azimuth_dirs_[static_cast<std::size_t>(a)] = {std::cos(phi), std::sin(phi)};
    }
    // Zenith bands ordered by increasing elevation (decreasing zenith).
    tan_elev_.resize(static_cast<std::size_t>(n_zenith_));
    cos_zen_.resize(static_cast<std::size_t>(n_zenith_));
    weights_.resize(static_cast<std::size_t>(n_zenith_));
    double wsum = 0.0;
    for (int j = 0; j < n_zenith_; ++j) {
      const double cz = (j + 0.5) / n_zenith_;
      const double sz = std::sqrt(1.0 - cz * cz);
      cos_zen_[static_cast<std::size_t>(j)] = cz;
      tan_elev_[static_cast<std::size_t>(j)] = cz / sz;
      weights_[static_cast<std::size_t>(j)] = cosine_weighted ? cz : 1.0;
      wsum += weights_[static_cast<std::size_t>(j)];
    }
    for (auto& w : weights_) w /= wsum * n_azimuth_;
    cumulative_.assign(weights_.size() + 1, 0.0);
    for (std::size_t j = 0; j < weights_.size(); ++j) cumulative_[j + 1] = cumulative_[j] + weights_[j];
  }

  int size() const { return n_azimuth_ * n_zenith_; }
  int azimuths() const { return n_azimuth_; }
  int zeniths() const { return n_zenith_; }
  geom::Vec2 azimuth_dir(int a) const { return azimuth_dirs_[static_cast<std::size_t>(a)]; }
  double tan_elevation(int j) const { return tan_elev_[static_cast<std::size_t>(j)]; }
  double weight(int j) const { return weights_[static_cast<std::size_t>(j)]; }

  geom::Vec3 direction(int a, int j) const {
    const double cz = cos_zen_[static_cast<std::size_t>(j)];
    const double sz = std::sqrt(1.0 - cz * cz);
    const auto d = azimuth_dir(a);
    return {sz * d.x, sz * d.y, cz};
  }

  // Weight of the rays in one azimuth column with tan(elevation) < limit.
  double blocked_weight(double tan_limit) const {
    const auto it = std::lower_bound(tan_elev_.begin(), tan_elev_.end(), tan_limit);
    return cumulative_[static_cast<std::size_t>(it - tan_elev_.begin())];
  }

 private:
  int n_azimuth_ = 0;
  int n_zenith_ = 0;
  std::vector<geom::Vec2> azimuth_dirs_;
  std::vector<double> tan_elev_;
  std::vector<double> cos_zen_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

// Centres of the park grid cells in world coordinates. A park smaller than
// one cell yields its centroid.
inline std::vector<geom::Vec2> park_grid(const geom::OrientedRect& park, double resolution) {
  const int nx = std::max(1, static_cast<int>(std::floor(park.width / resolution + 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::floor(park.length / resolution + 1e-9)));
  const double cw = park.width / nx, cl = park.length / ny;
  std::vector<geom::Vec2> pts;
  pts.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const geom::Vec2 local{-park.width / 2 + (i + 0.5) * cw, -park.length / 2 + (j + 0.5) * cl};
      pts.push_back(geom::rotate(park.center + local, park.rot_deg, park.center));
    }
  return pts;
}

namespace detail {

inline std::vector<geom::BoxFrame> frames_of(const Scene& scene) {
  std::vector<geom::BoxFrame> frames;
  frames.reserve(scene.buildings.size());
  for (const auto& b : scene.buildings) frames.emplace_back(b);
  return frames;
}

}  // namespace detail

// Unobstructed sky fraction at one point. Per azimuth column the blocked
// rays are exactly those below the highest box horizon, so each column costs
// one 2D slab test per box.
inline double point_svf(const std::vector<geom::BoxFrame>& boxes, geom::Vec3 p,
                        const HemisphereRays& rays) {
  double blocked = 0.0;
  for (int a = 0; a < rays.azimuths(); ++a) {
    const geom::Vec2 dir = rays.azimuth_dir(a);
    double limit = 0.0;
    for (const auto& box : boxes) {
      if (box.height <= p.z) continue;
      double t_in, t_out;
      if (!geom::footprint_interval(box, {p.x, p.y}, dir, t_in, t_out)) continue;
      if (t_in <= 0.0) {
        limit = std::numeric_limits<double>::infinity();
        break;
      }
      limit = std::max(limit, (box.height - p.z) / t_in);
    }
    if (limit > 0.0) blocked += rays.blocked_weight(limit);
  }
  return 1.0 - blocked;
}

// Same quantity by casting every ray against every box in 3D.
inline double point_svf_reference(const std::vector<geom::BoxFrame>& boxes, geom::Vec3 p,
                                  const HemisphereRays& rays) {
  double visible = 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  for (int a = 0; a < rays.azimuths(); ++a)
    for (int j = 0; j < rays.zeniths(); ++j) {
      const geom::Vec3 d = rays.direction(a, j);
      bool hit = false;
      for (const auto& box : boxes)
        if (geom::intersects(box, p, d, inf)) {
          hit = true;
          break;
        }
      if (!hit) visible += rays.weight(j);
    }
  return visible;
}

inline double compute_svf(const Scene& scene, const SamplerConfig& cfg = {}) {
  cfg.validate();
  if (!scene.park) throw DomainError("compute_svf: scene has no park");
  const HemisphereRays rays(cfg.hemisphere_rays, cfg.cosine_weighted);
  const auto boxes = detail::frames_of(scene);
  const auto pts = park_grid(*scene.park, cfg.grid_resolution);
  double sum = 0.0;
  for (const auto& q : pts) sum += point_svf(boxes, {q.x, q.y, cfg.eval_height}, rays);
  return std::clamp(100.0 * sum / static_cast<double>(pts.size()), 0.0, 100.0);
}

// World-space window points: centroids of the two windowed facades (local
// +y and -y faces) of building `i`, at window height.
inline std::array<geom::Vec3, 2> window_points(const Scene& scene, std::size_t i, double height) {
  const auto& fp = scene.buildings[i].footprint;
  std::array<geom::Vec3, 2> out;
  for (int k = 0; k < 2; ++k) {
    const geom::Vec2 local{0.0, (k == 0 ? 0.5 : -0.5) * fp.length};
    const geom::Vec2 w = geom::rotate(fp.center + local, fp.rot_deg, fp.center);
    out[static_cast<std::size_t>(k)] = {w.x, w.y, height};
  }
  return out;
}

// Mean over window points of the fraction of park cells in unobstructed
// line of sight. A window's own building is not an occluder. Returns
// nullopt when the scene has no buildings.
inline std::optional<double> compute_visibility(const Scene& scene, const SamplerConfig& cfg = {}) {
  cfg.validate();
  if (!scene.park) throw DomainError("compute_visibility: scene has no park");
  if (scene.buildings.empty()) return std::nullopt;
  const auto boxes = detail::frames_of(scene);
  const auto cells = park_grid(*scene.park, cfg.grid_resolution);
  double total = 0.0;
  std::size_t windows = 0;
  for (std::size_t b = 0; b < scene.buildings.size(); ++b) {
    for (const auto& w : window_points(scene, b, cfg.window_height)) {
      std::size_t seen = 0;
      for (const auto& c : cells) {
        const geom::Vec3 d{c.x - w.x, c.y - w.y, cfg.eval_height - w.z};
        bool blocked = false;
        for (std::size_t o = 0; o < boxes.size() && !blocked; ++o)
          blocked = o != b && geom::intersects(boxes[o], w, d, 1.0);
        if (!blocked) ++seen;
      }
      total += static_cast<double>(seen) / static_cast<double>(cells.size());
      ++windows;
    }
  }
  return std::clamp(100.0 * total / static_cast<double>(windows), 0.0, 100.0);
}

inline SimulationResult simulate_scene(const Scene& scene, const SamplerConfig& cfg = {}) {
  SimulationResult r;
  r.svf = compute_svf(scene, cfg);
  const auto vis = compute_visibility(scene, cfg);
  r.valid = vis.has_value();
  r.visibility = vis.value_or(0.0);
  r.visibility_class = r.valid ? classify_visibility(r.visibility) : 0;
  return r;
}

}  // namespace urbancfx
