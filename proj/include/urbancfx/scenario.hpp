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

// Urban block data model: the 21-feature scenario record, its geometric
// realization (Scene), and the procedural block generator.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "urbancfx/common.hpp"
#include "urbancfx/geometry.hpp"

namespace urbancfx {

// Imputed value for d[dir] when no building exists in the sector.
inline constexpr double kAbsentDistance = 100.0;

struct UrbanScenario {
  std::int64_t id = 0;
  double orientation_deg = 0.0;
  double street_width = 6.0;
  double building_width = 0.0;
  double building_length = 0.0;
  double park_area = 0.0;
  std::array<int, kNumDirections> heights{};  // stories; 0 = no building
  std::array<std::optional<double>, kNumDirections> distances{};

  std::vector<double> features(double absent_distance = kAbsentDistance) const {
    std::vector<double> f(kNumFeatures);
    f[kOrientation] = orientation_deg;
    f[kStreetWidth] = street_width;
    f[kBuildingWidth] = building_width;
    f[kBuildingLength] = building_length;
    f[kParkArea] = park_area;
    for (int d = 0; d < kNumDirections; ++d) {
      f[height_index(d)] = heights[d];
      f[distance_index(d)] = heights[d] > 0 && distances[d] ? *distances[d] : absent_distance;
    }
    return f;
  }

  // Inverse of features(): sectors with h = 0 get no distance.
  static UrbanScenario from_features(std::span<const double> f, std::int64_t id = 0) {
    if (f.size() != kNumFeatures) throw DomainError("from_features: expected 21 features");
    UrbanScenario s;
    s.id = id;
    s.orientation_deg = f[kOrientation];
    s.street_width = f[kStreetWidth];
    s.building_width = f[kBuildingWidth];
    s.building_length = f[kBuildingLength];
    s.park_area = f[kParkArea];
    for (int d = 0; d < kNumDirections; ++d) {
      s.heights[d] = static_cast<int>(std::lround(f[height_index(d)]));
      if (s.heights[d] > 0) s.distances[d] = f[distance_index(d)];
    }
    return s;
  }

  // Checks the record invariants; `generated` also enforces the 3..10 story
  // range for present buildings.
  void validate(bool generated = false) const {
    auto fail = [this](const std::string& what) {
      throw DomainError("scenario " + std::to_string(id) + ": " + what);
    };
    if (orientation_deg != -40.0 && orientation_deg != 0.0 && orientation_deg != 40.0)
      fail("orientation must be one of -40, 0, 40");
    if (street_width != 6.0 && street_width != 12.0) fail("street_width must be 6 or 12");
    if (!(building_width > 0) || !(building_length > 0)) fail("building footprint must be positive");
    if (!(park_area > 0)) fail("park_area must be positive");
    for (int d = 0; d < kNumDirections; ++d) {
      const int h = heights[d];
      if (h < 0 || h > 10) fail("h" + std::string(kDirectionNames[d]) + " outside [0,10]");
      if (generated && h > 0 && h < 3)
        fail("h" + std::string(kDirectionNames[d]) + " must be 0 or in [3,10]");
      if (h > 0 && (!distances[d] || *distances[d] < 0))
        fail("d" + std::string(kDirectionNames[d]) + " missing or negative");
    }
  }

  friend bool operator==(const UrbanScenario&, const UrbanScenario&) = default;
};

// Geometric realization of a block. Coordinates are world coordinates; the
// block-local frame is obtained by rotating by -orientation_deg about pivot.
struct Scene {
  double orientation_deg = 0.0;
  geom::Vec2 pivot;
  double street_width = 6.0;
  double wwr = 0.40;
  std::optional<geom::OrientedRect> park;
  std::vector<geom::OrientedBox> buildings;

  geom::Vec2 to_local(geom::Vec2 p) const { return geom::rotate(p, -orientation_deg, pivot); }
  geom::Vec2 to_world(geom::Vec2 p) const { return geom::rotate(p, orientation_deg, pivot); }

  // Rigid rotation of the whole layout about the pivot.
  Scene rotated(double deg) const {
    Scene out = *this;
    out.orientation_deg += deg;
    auto turn = [&](geom::OrientedRect& r) {
      r.center = geom::rotate(r.center, deg, pivot);
      r.rot_deg += deg;
    };
    if (out.park) turn(*out.park);
    for (auto& b : out.buildings) turn(b.footprint);
    return out;
  }
};

// --- sectors ----------------------------------------------------------------

// Clockwise bearing from local north (+y), degrees in [0, 360).
inline double bearing_deg(geom::Vec2 offset) {
  double b = std::atan2(offset.x, offset.y) * 180.0 / std::numbers::pi;
  if (b < 0) b += 360.0;
  return b;
}

// 45-degree wedges centred on the compass axes, half-open at the
// counter-clockwise edge.
inline int sector_of(geom::Vec2 offset) {
  const double b = bearing_deg(offset);
  return static_cast<int>(std::floor((b + 22.5) / 45.0)) % kNumDirections;
}

// Unit vector of a sector axis in the local frame.
inline geom::Vec2 sector_axis(int dir) {
  const double a = geom::deg2rad(45.0 * dir);
  return {std::sin(a), std::cos(a)};
}

// Per sector: the building whose centroid falls in the wedge and whose
// footprint is closest to the park edge.
inline UrbanScenario extract_features(const Scene& scene) {
  if (!scene.park) throw DomainError("extract_features: scene has no park");
  UrbanScenario s;
  s.orientation_deg = scene.orientation_deg;
  s.street_width = scene.street_width;
  geom::OrientedRect park = *scene.park;
  park.center = scene.to_local(park.center);
  park.rot_deg -= scene.orientation_deg;
  s.park_area = park.area();
  if (!scene.buildings.empty()) {
    s.building_width = scene.buildings.front().footprint.width;
    s.building_length = scene.buildings.front().footprint.length;
  }
  std::array<double, kNumDirections> best;
  best.fill(std::numeric_limits<double>::infinity());
  std::array<double, kNumDirections> best_center;
  best_center.fill(std::numeric_limits<double>::infinity());
  for (const auto& b : scene.buildings) {
    geom::OrientedRect fp = b.footprint;
    fp.center = scene.to_local(fp.center);
    fp.rot_deg -= scene.orientation_deg;
    const geom::Vec2 off = fp.center - park.center;
    const int dir = sector_of(off);
    const double dist = geom::distance(park, fp);
    const double cdist = geom::norm(off);
    if (dist < best[dir] || (dist == best[dir] && cdist < best_center[dir])) {
      best[dir] = dist;
      best_center[dir] = cdist;
      s.heights[dir] = static_cast<int>(std::lround(b.height / kStoryHeight));
      s.distances[dir] = dist;
    }
  }
  return s;
}

// Index of the sector-representative building per direction, using the
// same selection rule as extract_features.
inline std::array<std::optional<std::size_t>, kNumDirections> sector_buildings(const Scene& scene) {
  if (!scene.park) throw DomainError("sector_buildings: scene has no park");
  const geom::OrientedRect& park = *scene.park;
  std::array<std::optional<std::size_t>, kNumDirections> out;
  std::array<double, kNumDirections> best, best_center;
  best.fill(std::numeric_limits<double>::infinity());
  best_center.fill(std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < scene.buildings.size(); ++i) {
    const auto& fp = scene.buildings[i].footprint;
    const geom::Vec2 off = scene.to_local(fp.center) - scene.to_local(park.center);
    const int dir = sector_of(off);
    const double dist = geom::distance(park, fp);
    const double cdist = geom::norm(off);
    if (dist < best[dir] || (dist == best[dir] && cdist < best_center[dir])) {
      best[dir] = dist;
      best_center[dir] = cdist;
      out[dir] = i;
    }
  }
  return out;
}

// Applies a feature edit to an existing scene: each changed sector's
// representative building is re-storeyed, removed (height 0), or translated
// radially away from the park centre until its facade distance matches.
// Buildings cannot be added to empty sectors.
inline Scene apply_scenario_edit(const Scene& base, const UrbanScenario& from, const UrbanScenario& to) {
  const auto reps = sector_buildings(base);
  const geom::OrientedRect& park = *base.park;
  Scene out = base;
  std::vector<bool> removed(base.buildings.size(), false);
  std::vector<std::size_t> moved;
  for (int dir = 0; dir < kNumDirections; ++dir) {
    const bool h_same = from.heights[dir] == to.heights[dir];
    const double d_from = from.distances[dir].value_or(kAbsentDistance);
    const double d_to = to.distances[dir].value_or(kAbsentDistance);
    if (h_same && std::abs(d_from - d_to) < 1e-9) continue;
    if (!reps[dir])
      throw DomainError("apply_scenario_edit: no building in sector " + std::string(kDirectionNames[dir]));
    const std::size_t i = *reps[dir];
    if (to.heights[dir] == 0) {
      removed[i] = true;
      continue;
    }
    auto& b = out.buildings[i];
    b.height = to.heights[dir] * kStoryHeight;
    const double d0 = geom::distance(park, b.footprint);
    if (std::abs(d0 - d_to) > 1e-9) {
      geom::Vec2 u = b.footprint.center - park.center;
      u = (1.0 / geom::norm(u)) * u;
      const geom::Vec2 c0 = b.footprint.center;
      auto dist_at = [&](double t) {
        geom::OrientedRect r = b.footprint;
        r.center = c0 + t * u;
        return geom::distance(park, r);
      };
      double lo = 0.0, hi = 0.0;
      if (d_to > d0) {
        hi = d_to - d0;
        while (dist_at(hi) < d_to) hi *= 2;
      } else {
        lo = -(d0 - d_to);
        while (dist_at(lo) > d_to && lo > -1e4) lo *= 2;
      }
      for (int it = 0; it < 100; ++it) {
        const double mid = (lo + hi) / 2;
        (dist_at(mid) < d_to ? lo : hi) = mid;
      }
      b.footprint.center = c0 + ((lo + hi) / 2) * u;
      moved.push_back(i);
    }
  }
  for (std::size_t i : moved) {
    if (geom::overlaps(park, out.buildings[i].footprint, 1e-9))
      throw DomainError("apply_scenario_edit: moved building overlaps the park");
    for (std::size_t j = 0; j < out.buildings.size(); ++j)
      if (j != i && !removed[j] && geom::overlaps(out.buildings[i].footprint, out.buildings[j].footprint, 1e-9))
        throw DomainError("apply_scenario_edit: moved building overlaps a neighbour");
  }
  std::vector<geom::OrientedBox> kept;
  for (std::size_t i = 0; i < out.buildings.size(); ++i)
    if (!removed[i]) kept.push_back(out.buildings[i]);
  out.buildings = std::move(kept);
  return out;
}

// Builds the canonical layout for a scenario: square park centred at the
// origin, one building per occupied sector with its centroid on the sector
// axis at the requested facade distance.
inline Scene realize_scene(const UrbanScenario& s) {
  s.validate();
  Scene scene;
  scene.orientation_deg = s.orientation_deg;
  scene.street_width = s.street_width;
  const double side = std::sqrt(s.park_area);
  scene.park = geom::OrientedRect{{0, 0}, side, side, 0.0};
  const double w = s.building_width, l = s.building_length;
  const double half = side / 2;

  std::vector<std::pair<int, geom::OrientedRect>> placed;
  for (int dir = 0; dir < kNumDirections; ++dir) {
    if (s.heights[dir] == 0) continue;
    const double d = *s.distances[dir];
    geom::Vec2 c;
    if (dir % 2 == 0) {
      // Cardinal: facade parallel to the park edge.
      const geom::Vec2 axis = sector_axis(dir);
      const double extent = (dir == 0 || dir == 4) ? l / 2 : w / 2;
      c = (half + d + extent) * geom::Vec2{std::round(axis.x), std::round(axis.y)};
    } else {
      // Diagonal: centroid at (+-t, +-t); solve for the corner gap so that the
      // rectangle distance equals d.
      const double k = std::abs(w - l) / 2;
      const double g = d <= k ? d : (k + std::sqrt(2 * d * d - k * k)) / 2;
      const double t = g + std::min(w, l) / 2 + half;
      const geom::Vec2 axis = sector_axis(dir);
      c = {axis.x > 0 ? t : -t, axis.y > 0 ? t : -t};
    }
    placed.emplace_back(dir, geom::OrientedRect{c, w, l, 0.0});
  }

  std::string collisions;
  for (std::size_t i = 0; i < placed.size(); ++i) {
    for (std::size_t j = i + 1; j < placed.size(); ++j) {
      if (geom::overlaps(placed[i].second, placed[j].second, 1e-9)) {
        if (!collisions.empty()) collisions += ", ";
        collisions += std::string(kDirectionNames[placed[i].first]) + "-" +
                      std::string(kDirectionNames[placed[j].first]);
      }
    }
  }
  if (!collisions.empty())
    throw DomainError("realize_scene: overlapping footprints between sectors " + collisions);

  for (auto& [dir, rect] : placed)
    scene.buildings.push_back({rect, s.heights[dir] * kStoryHeight});
  if (s.orientation_deg != 0.0) {
    const double o = s.orientation_deg;
    scene.orientation_deg = 0.0;
    scene = scene.rotated(o);
  }
  return scene;
}

// --- generator --------------------------------------------------------------

struct GeneratorConfig {
  double block_size = 100.0;
  std::vector<double> street_widths = {6.0, 12.0};
  std::vector<double> coverage_ratios = {0.60, 0.45};
  std::vector<double> green_ratios = {0.20, 0.40};
  std::vector<double> far_targets = {4.5, 6.5};
  double far_tolerance = 0.10;
  std::vector<double> orientations = {-40.0, 0.0, 40.0};
  int parcels_min = 6;
  int parcels_max = 24;
  double wwr = 0.40;
  int count = 1152;
  std::uint64_t seed = 7;

  void validate() const;
};

struct ParcelGrid {
  int nx = 0;
  int ny = 0;
};

struct GeneratedBlock {
  UrbanScenario scenario;
  Scene scene;
  ParcelGrid grid;
  double realized_far = 0.0;
  double far_target = 0.0;
};

namespace detail {

// Fits a rectangle of `area` inside a cell with `margin` on every side,
// keeping the cell's aspect where possible.
inline std::optional<std::pair<double, double>> fit_rect(double cell_w, double cell_l,
                                                         double area, double margin) {
  const double max_w = cell_w - 2 * margin, max_l = cell_l - 2 * margin;
  if (max_w <= 0 || max_l <= 0 || max_w * max_l < area) return std::nullopt;
  const double scale = std::sqrt(area / (cell_w * cell_l));
  double w = scale * cell_w, l = scale * cell_l;
  if (w > max_w) {
    w = max_w;
    l = area / w;
  } else if (l > max_l) {
    l = max_l;
    w = area / l;
  }
  if (w > max_w + 1e-9 || l > max_l + 1e-9) return std::nullopt;
  return std::pair{w, l};
}

struct BlockPlan {
  double parcel_w, parcel_l;   // parcel size
  double half_w, half_l;       // half-parcel cell holding one building
  bool split_x;                // buildings side by side along x
  double bw, bl;               // building footprint
  double pw, pl;               // park footprint
};

inline std::optional<BlockPlan> plan_block(double block, ParcelGrid g, double street,
                                           double coverage, double green) {
  BlockPlan p{};
  p.parcel_w = block / g.nx;
  p.parcel_l = block / g.ny;
  p.split_x = p.parcel_w >= p.parcel_l;
  p.half_w = p.split_x ? p.parcel_w / 2 : p.parcel_w;
  p.half_l = p.split_x ? p.parcel_l : p.parcel_l / 2;
  const double setback = street / 4;
  auto b = fit_rect(p.half_w, p.half_l, coverage * p.half_w * p.half_l, setback);
  auto park = fit_rect(p.parcel_w, p.parcel_l, green * p.parcel_w * p.parcel_l, setback);
  if (!b || !park) return std::nullopt;
  std::tie(p.bw, p.bl) = *b;
  std::tie(p.pw, p.pl) = *park;
  return p;
}

inline std::vector<ParcelGrid> candidate_grids(int pmin, int pmax) {
  std::vector<ParcelGrid> out;
  for (int n = pmin; n <= pmax; ++n)
    for (int nx = 2; nx <= n / 2; ++nx)
      if (n % nx == 0) {
        const int ny = n / nx;
        if (ny >= 2 && std::max(nx, ny) <= 3 * std::min(nx, ny)) out.push_back({nx, ny});
      }
  return out;
}

}  // namespace detail

inline void GeneratorConfig::validate() const {
  auto in_unit = [](double v) { return v > 0 && v < 1; };
  auto check_list = [](const std::vector<double>& v, const char* name) {
    if (v.empty()) throw ConfigError(std::string("generator.") + name + " must not be empty");
  };
  check_list(street_widths, "street_widths");
  check_list(coverage_ratios, "coverage_ratios");
  check_list(green_ratios, "green_ratios");
  check_list(far_targets, "far_targets");
  check_list(orientations, "orientations");
  for (double r : coverage_ratios)
    if (!in_unit(r)) throw ConfigError("generator.coverage_ratios must lie in (0,1)");
  for (double r : green_ratios)
    if (!in_unit(r)) throw ConfigError("generator.green_ratios must lie in (0,1)");
  if (!in_unit(far_tolerance)) throw ConfigError("generator.far_tolerance must lie in (0,1)");
  if (!in_unit(wwr)) throw ConfigError("generator.wwr must lie in (0,1)");
  if (parcels_min < 6 || parcels_max > 24 || parcels_min > parcels_max)
    throw ConfigError("generator.parcels range must lie within [6,24]");
  if (count < 1) throw ConfigError("generator.count must be >= 1");
  if (!(block_size > 0)) throw ConfigError("generator.block_size must be positive");
  for (double o : orientations)
    if (o != -40.0 && o != 0.0 && o != 40.0)
      throw ConfigError("generator.orientations must be drawn from {-40, 0, 40}");
  for (double sw : street_widths)
    if (sw != 6.0 && sw != 12.0) throw ConfigError("generator.street_widths must be 6 or 12");
  for (double t : far_targets)
    if (!(t > 0)) throw ConfigError("generator.far_targets must be positive");

  const auto grids = detail::candidate_grids(parcels_min, parcels_max);
  if (grids.empty())
    throw DomainError("generator: no parcel grid with " + std::to_string(parcels_min) + ".." +
                      std::to_string(parcels_max) + " parcels has a feasible aspect");
  for (double sw : street_widths)
    for (double cov : coverage_ratios)
      for (double green : green_ratios) {
        bool any = false;
        for (auto g : grids) any = any || detail::plan_block(block_size, g, sw, cov, green);
        if (!any) {
          std::ostringstream msg;
          msg << "generator: coverage ratio " << cov << " / green ratio " << green
              << " incompatible with parcel size for street width " << sw;
          throw DomainError(msg.str());
        }
      }
}

// Floor-area ratio measured against the covered share of the block:
// total floor area / (block area * coverage).
inline double realized_far(const Scene& scene, double block_area, double coverage) {
  double floor_area = 0.0;
  for (const auto& b : scene.buildings)
    floor_area += b.footprint.area() * std::lround(b.height / kStoryHeight);
  return floor_area / (block_area * coverage);
}

// Generates one block from its derived seed.
inline GeneratedBlock generate_block(const GeneratorConfig& cfg, std::size_t index) {
  std::mt19937_64 rng(mix_seed(cfg.seed, index));
  auto pick = [&rng](const auto& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  const double street = pick(cfg.street_widths);
  const double coverage = pick(cfg.coverage_ratios);
  const double green = pick(cfg.green_ratios);
  const double far_target = pick(cfg.far_targets);
  const double orientation = pick(cfg.orientations);

  std::vector<std::pair<ParcelGrid, detail::BlockPlan>> feasible;
  for (auto g : detail::candidate_grids(cfg.parcels_min, cfg.parcels_max))
    if (auto p = detail::plan_block(cfg.block_size, g, street, coverage, green))
      feasible.emplace_back(g, *p);
  if (feasible.empty()) throw DomainError("generator: no feasible parcel grid");
  const auto [grid, plan] = pick(feasible);

  const double setback = street / 4;
  auto jitter = [&rng](double slack) {
    return slack > 0 ? std::uniform_real_distribution<double>(-slack, slack)(rng) : 0.0;
  };

  // Park parcel: the one whose centre is closest to the block centre.
  const double B = cfg.block_size;
  std::vector<std::pair<int, int>> central;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) {
      const double dx = (i + 0.5) * plan.parcel_w - B / 2, dy = (j + 0.5) * plan.parcel_l - B / 2;
      const double dd = std::round((dx * dx + dy * dy) * 1e6);
      if (dd < best) {
        best = dd;
        central.clear();
      }
      if (dd == best) central.emplace_back(i, j);
    }
  const auto [park_i, park_j] = pick(central);

  Scene scene;
  scene.pivot = {B / 2, B / 2};
  scene.street_width = street;
  scene.wwr = cfg.wwr;
  {
    const double cx = (park_i + 0.5) * plan.parcel_w, cy = (park_j + 0.5) * plan.parcel_l;
    const double sx = (plan.parcel_w - plan.pw) / 2 - setback;
    const double sy = (plan.parcel_l - plan.pl) / 2 - setback;
    scene.park = geom::OrientedRect{{cx + jitter(sx), cy + jitter(sy)}, plan.pw, plan.pl, 0.0};
  }
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) {
      if (i == park_i && j == park_j) continue;
      for (int k = 0; k < 2; ++k) {
        double cx = (i + 0.5) * plan.parcel_w, cy = (j + 0.5) * plan.parcel_l;
        if (plan.split_x)
          cx += (k == 0 ? -0.25 : 0.25) * plan.parcel_w;
        else
          cy += (k == 0 ? -0.25 : 0.25) * plan.parcel_l;
        const double sx = (plan.half_w - plan.bw) / 2 - setback;
        const double sy = (plan.half_l - plan.bl) / 2 - setback;
        scene.buildings.push_back(
            {geom::OrientedRect{{cx + jitter(sx), cy + jitter(sy)}, plan.bw, plan.bl, 0.0}, 0.0});
      }
    }

  // Heights: proposals centred on the story count implied by the FAR target,
  // rejected until the realized FAR is within tolerance.
  const double block_area = B * B;
  double footprint_total = 0.0;
  for (const auto& b : scene.buildings) footprint_total += b.footprint.area();
  const double mean_stories = far_target * block_area * coverage / footprint_total;
  std::normal_distribution<double> story_dist(mean_stories, 1.75);
  double far = 0.0;
  bool accepted = false;
  for (int attempt = 0; attempt < 2000 && !accepted; ++attempt) {
    for (auto& b : scene.buildings) {
      const int st = static_cast<int>(std::clamp(std::lround(story_dist(rng)), 3L, 10L));
      b.height = st * kStoryHeight;
    }
    far = realized_far(scene, block_area, coverage);
    accepted = std::abs(far - far_target) <= cfg.far_tolerance * far_target;
  }
  if (!accepted) {
    std::ostringstream msg;
    msg << "generator: FAR target " << far_target << " unreachable with 3-10 story buildings";
    throw DomainError(msg.str());
  }

  if (orientation != 0.0) scene = scene.rotated(orientation);

  GeneratedBlock out;
  out.scenario = extract_features(scene);
  out.scenario.id = static_cast<std::int64_t>(index);
  out.scenario.building_width = plan.bw;
  out.scenario.building_length = plan.bl;
  out.scene = std::move(scene);
  out.grid = grid;
  out.realized_far = far;
  out.far_target = far_target;
  return out;
}

inline std::vector<GeneratedBlock> generate_blocks(const GeneratorConfig& cfg, int threads = 1) {
  cfg.validate();
  std::vector<GeneratedBlock> out(static_cast<std::size_t>(cfg.count));
  parallel_for(out.size(), threads, [&](std::size_t i) { out[i] = generate_block(cfg, i); });
  return out;
}

inline std::vector<std::pair<UrbanScenario, Scene>> generate_scenarios(const GeneratorConfig& cfg,
                                                                       int threads = 1) {
  auto blocks = generate_blocks(cfg, threads);
  std::vector<std::pair<UrbanScenario, Scene>> out;
  out.reserve(blocks.size());
  for (auto& b : blocks) out.emplace_back(std::move(b.scenario), std::move(b.scene));
  return out;
}

// --- scene JSON ---------------------------------------------------------------

inline nlohmann::ordered_json scene_to_json(const Scene& s) {
  nlohmann::ordered_json j;
  j["orientation_deg"] = s.orientation_deg;
  j["pivot"] = {s.pivot.x, s.pivot.y};
  j["street_width_m"] = s.street_width;
  j["wwr"] = s.wwr;
  if (s.park) {
    j["park"] = {{"cx", s.park->center.x},
                 {"cy", s.park->center.y},
                 {"w", s.park->width},
                 {"l", s.park->length},
                 {"rot_deg", s.park->rot_deg}};
  } else {
    j["park"] = nullptr;
  }
  j["boxes"] = nlohmann::ordered_json::array();
  for (const auto& b : s.buildings)
    j["boxes"].push_back({{"cx", b.footprint.center.x},
                          {"cy", b.footprint.center.y},
                          {"w", b.footprint.width},
                          {"l", b.footprint.length},
                          {"h_m", b.height},
                          {"rot_deg", b.footprint.rot_deg}});
  return j;
}

inline Scene scene_from_json(const nlohmann::json& j) {
  try {
    Scene s;
    s.orientation_deg = j.at("orientation_deg").get<double>();
    s.pivot = {j.at("pivot").at(0).get<double>(), j.at("pivot").at(1).get<double>()};
    s.street_width = j.at("street_width_m").get<double>();
    s.wwr = j.value("wwr", 0.40);
    if (!j.at("park").is_null()) {
      const auto& p = j.at("park");
      s.park = geom::OrientedRect{{p.at("cx").get<double>(), p.at("cy").get<double>()},
                                  p.at("w").get<double>(),
                                  p.at("l").get<double>(),
                                  p.at("rot_deg").get<double>()};
    }
    for (const auto& b : j.at("boxes"))
      s.buildings.push_back({geom::OrientedRect{{b.at("cx").get<double>(), b.at("cy").get<double>()},
                                                b.at("w").get<double>(),
                                                b.at("l").get<double>(),
                                                b.at("rot_deg").get<double>()},
                             b.at("h_m").get<double>()});
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed scene JSON: ") + e.what());
  }
}

}  // namespace urbancfx
