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

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace urbancfx::geom {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Counter-clockwise rotation by `deg` about `pivot`.
inline Vec2 rotate(Vec2 p, double deg, Vec2 pivot = {}) {
  const double a = deg2rad(deg);
  const double c = std::cos(a), s = std::sin(a);
  const Vec2 d = p - pivot;
  return {pivot.x + c * d.x - s * d.y, pivot.y + s * d.x + c * d.y};
}

// Rectangle of size width (local x) by length (local y), centred at `center`
// and rotated counter-clockwise by rot_deg.
struct OrientedRect {
  Vec2 center;
  double width = 0.0;
  double length = 0.0;
  double rot_deg = 0.0;

  double area() const { return width * length; }

  std::array<Vec2, 4> corners() const {
    const double hw = width / 2, hl = length / 2;
    const std::array<Vec2, 4> local = {Vec2{-hw, -hl}, Vec2{hw, -hl}, Vec2{hw, hl}, Vec2{-hw, hl}};
    std::array<Vec2, 4> out;
    for (int i = 0; i < 4; ++i) out[i] = rotate(center + local[i], rot_deg, center);
    return out;
  }
};

// Separating-axis test; true when the interiors overlap by more than `tol`.
inline bool overlaps(const OrientedRect& a, const OrientedRect& b, double tol = 1e-9) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const std::array<Vec2, 4> axes = {ca[1] - ca[0], ca[3] - ca[0], cb[1] - cb[0], cb[3] - cb[0]};
  for (Vec2 axis : axes) {
    const double n = norm(axis);
    if (n == 0.0) continue;
    axis = (1.0 / n) * axis;
    double amin = std::numeric_limits<double>::infinity(), amax = -amin;
    double bmin = amin, bmax = -amin;
    for (const auto& p : ca) {
      amin = std::min(amin, dot(p, axis));
      amax = std::max(amax, dot(p, axis));
    }
    for (const auto& p : cb) {
      bmin = std::min(bmin, dot(p, axis));
      bmax = std::max(bmax, dot(p, axis));
    }
    if (amax - bmin <= tol || bmax - amin <= tol) return false;
  }
  return true;
}

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

// Minimum Euclidean distance between two rectangles (0 when they touch or
// overlap).
inline double distance(const OrientedRect& a, const OrientedRect& b) {
  if (overlaps(a, b, 0.0)) return 0.0;
  const auto ca = a.corners();
  const auto cb = b.corners();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      best = std::min(best, point_segment_distance(ca[i], cb[j], cb[(j + 1) % 4]));
      best = std::min(best, point_segment_distance(cb[j], ca[i], ca[(i + 1) % 4]));
    }
  }
  return best;
}

// Box standing on the ground: footprint rect, extruded from z = 0 to height.
struct OrientedBox {
  OrientedRect footprint;
  double height = 0.0;
};

// Frame for fast repeated intersection tests against one box.
struct BoxFrame {
  Vec2 center;
  double cos_r = 1.0;
  double sin_r = 0.0;
  double half_w = 0.0;
  double half_l = 0.0;
  double height = 0.0;

  explicit BoxFrame(const OrientedBox& b)
      : center(b.footprint.center),
        cos_r(std::cos(deg2rad(b.footprint.rot_deg))),
        sin_r(std::sin(deg2rad(b.footprint.rot_deg))),
        half_w(b.footprint.width / 2),
        half_l(b.footprint.length / 2),
        height(b.height) {}

  Vec2 to_local(Vec2 p) const {
    const Vec2 d = p - center;
    return {cos_r * d.x + sin_r * d.y, -sin_r * d.x + cos_r * d.y};
  }
  Vec2 dir_to_local(Vec2 d) const { return {cos_r * d.x + sin_r * d.y, -sin_r * d.x + cos_r * d.y}; }
};

namespace detail {

// Clips [t0, t1] against the slab lo <= o + t d <= hi. Returns false if empty.
inline bool clip_slab(double o, double d, double lo, double hi, double& t0, double& t1) {
  if (d == 0.0) return o >= lo && o <= hi;
  double ta = (lo - o) / d, tb = (hi - o) / d;
  if (ta > tb) std::swap(ta, tb);
  t0 = std::max(t0, ta);
  t1 = std::min(t1, tb);
  return true;
}

}  // namespace detail

// 3D slab test of the ray/segment o + t d, t in (0, t_max), against the box.
// A hit requires a parameter interval of positive length inside the box, so
// rays leaving a face they start on do not count as hits.
inline bool intersects(const BoxFrame& box, Vec3 o, Vec3 d, double t_max) {
  const Vec2 lo = box.to_local({o.x, o.y});
  const Vec2 ld = box.dir_to_local({d.x, d.y});
  double t0 = 0.0, t1 = t_max;
  if (!detail::clip_slab(lo.x, ld.x, -box.half_w, box.half_w, t0, t1)) return false;
  if (!detail::clip_slab(lo.y, ld.y, -box.half_l, box.half_l, t0, t1)) return false;
  if (!detail::clip_slab(o.z, d.z, 0.0, box.height, t0, t1)) return false;
  return t0 < t1;
}

// 2D slab entry/exit of the horizontal ray o + t d against the footprint.
// Returns false when the ray misses or the footprint lies behind it.
inline bool footprint_interval(const BoxFrame& box, Vec2 o, Vec2 d, double& t_in, double& t_out) {
  const Vec2 lo = box.to_local(o);
  const Vec2 ld = box.dir_to_local(d);
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  if (!detail::clip_slab(lo.x, ld.x, -box.half_w, box.half_w, t0, t1)) return false;
  if (!detail::clip_slab(lo.y, ld.y, -box.half_l, box.half_l, t0, t1)) return false;
  if (!(t0 < t1) || t1 <= 0.0) return false;
  t_in = t0;
  t_out = t1;
  return true;
}

}  // namespace urbancfx::geom
