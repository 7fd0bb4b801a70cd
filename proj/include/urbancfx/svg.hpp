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

// Static SVG figures rendered from the CSV artifacts alone.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "urbancfx/csv.hpp"

namespace urbancfx::svg {

inline std::string num(double v) { return csv::fixed(v, 2); }

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

class Canvas {
 public:
  Canvas(double w, double h) : w_(w), h_(h) {}

  void line(double x1, double y1, double x2, double y2, const std::string& stroke = "#333", double width = 1) {
    body_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
          << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width) << "\"/>\n";
  }
  void rect(double x, double y, double w, double h, const std::string& fill, const std::string& stroke = "#333") {
    body_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
          << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
  }
  void circle(double x, double y, double r, const std::string& fill) {
    body_ << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << num(r) << "\" fill=\"" << fill
          << "\"/>\n";
  }
  void text(double x, double y, const std::string& s, const std::string& anchor = "start", int size = 11) {
    body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << size
          << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\">" << escape(s) << "</text>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke, bool closed = false,
                const std::string& fill = "none") {
    body_ << '<' << (closed ? "polygon" : "polyline") << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) body_ << (i ? " " : "") << num(pts[i].first) << ',' << num(pts[i].second);
    body_ << "\" fill=\"" << fill << "\" fill-opacity=\"0.25\" stroke=\"" << stroke << "\" stroke-width=\"2\"/>\n";
  }

  std::string str() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w_) << "\" height=\"" << num(h_)
        << "\" viewBox=\"0 0 " << num(w_) << ' ' << num(h_) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  double w_, h_;
  std::ostringstream body_;
};

// Blue (low) to red (high).
inline std::string ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(30 + 210 * t));
  const int b = static_cast<int>(std::lround(240 - 210 * t));
  std::ostringstream s;
  s << "rgb(" << r << ",60," << b << ')';
  return s.str();
}

struct Axis {
  double lo, hi, px_lo, px_hi;
  double operator()(double v) const { return hi > lo ? px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo) : px_lo; }
};

inline std::pair<double, double> padded(double lo, double hi) {
  if (!(hi > lo)) return {lo - 1, hi + 1};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

// Beeswarm of per-instance attributions for the `top` ranked features;
// colour encodes the feature value normalized within the feature.
inline std::string beeswarm(const csv::Table& t, std::size_t top = 15) {
  const auto cf = t.column("feature"), cr = t.column("rank"), cv = t.column("value"), cp = t.column("phi");
  std::map<int, std::string> names;
  std::map<int, std::vector<std::pair<double, double>>> pts;  // rank -> (value, phi)
  double lo = 0, hi = 0;
  for (const auto& r : t.rows) {
    const int rank = static_cast<int>(csv::parse_double(r[cr], "rank"));
    if (rank < 1 || static_cast<std::size_t>(rank) > top) continue;
    names[rank] = r[cf];
    const double phi = csv::parse_double(r[cp], "phi");
    pts[rank].push_back({csv::parse_double(r[cv], "value"), phi});
    lo = std::min(lo, phi);
    hi = std::max(hi, phi);
  }
  const double row_h = 24, left = 140, width = 420;
  Canvas c(left + width + 40, 60 + row_h * static_cast<double>(std::max<std::size_t>(names.size(), 1)) + 40);
  const auto [a, b] = padded(lo, hi);
  const Axis x{a, b, left, left + width};
  c.text(left + width / 2, 20, "Shapley values by feature", "middle", 13);
  const double bottom = 40 + row_h * static_cast<double>(names.size());
  c.line(x(0), 30, x(0), bottom, "#999");
  for (const auto& [rank, list] : pts) {
    const double y = 40 + row_h * (rank - 0.5);
    c.text(left - 8, y + 4, names[rank], "end");
    double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
    for (auto [v, p] : list) {
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto [v, p] = list[i];
      const double jitter = (static_cast<double>((i * 7919) % 97) / 96.0 - 0.5) * row_h * 0.6;
      c.circle(x(p), y + jitter, 2.2, ramp(vmax > vmin ? (v - vmin) / (vmax - vmin) : 0.5));
    }
  }
  c.line(left, bottom, left + width, bottom);
  c.text(left, bottom + 16, num(a), "middle");
  c.text(left + width, bottom + 16, num(b), "middle");
  c.text(left + width / 2, bottom + 30, "phi (model output units)", "middle");
  return c.str();
}

// Radar chart of mean |phi| per compass direction, heights and distances.
inline std::string circular(const csv::Table& t) {
  const auto cg = t.column("group"), cd = t.column("direction"), cm = t.column("mean_abs_phi");
  static const std::vector<std::string> dirs = {"N", "NE", "E", "SE", "S", "SW", "W", "NW"};
  std::map<std::string, std::vector<double>> groups;
  double peak = 0;
  for (const auto& r : t.rows) {
    auto& g = groups[r[cg]];
    g.resize(dirs.size());
    const auto it = std::find(dirs.begin(), dirs.end(), r[cd]);
    if (it == dirs.end()) throw IoError("circular CSV: unknown direction '" + r[cd] + "'");
    const double v = csv::parse_double(r[cm], "mean_abs_phi");
    g[static_cast<std::size_t>(it - dirs.begin())] = v;
    peak = std::max(peak, v);
  }
  const double cx = 220, cy = 220, radius = 160;
  Canvas c(440, 470);
  c.text(cx, 24, "Directional importance (mean |phi|)", "middle", 13);
  for (int ring = 1; ring <= 4; ++ring) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      const double ang = static_cast<double>(k) * std::numbers::pi / 4;
      pts.push_back({cx + radius * ring / 4 * std::sin(ang), cy - radius * ring / 4 * std::cos(ang)});
    }
    c.polyline(pts, "#ccc", true, "none");
  }
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    const double ang = static_cast<double>(k) * std::numbers::pi / 4;
    c.line(cx, cy, cx + radius * std::sin(ang), cy - radius * std::cos(ang), "#ccc");
    c.text(cx + (radius + 16) * std::sin(ang), cy - (radius + 16) * std::cos(ang) + 4, dirs[k], "middle");
  }
  const std::vector<std::string> colours = {"#d1495b", "#00798c", "#edae49"};
  std::size_t gi = 0;
  for (const auto& [name, vals] : groups) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      const double r = peak > 0 ? radius * vals[k] / peak : 0;
      const double ang = static_cast<double>(k) * std::numbers::pi / 4;
      pts.push_back({cx + r * std::sin(ang), cy - r * std::cos(ang)});
    }
    const auto& col = colours[gi % colours.size()];
    c.polyline(pts, col, true, col);
    c.rect(20, 420 + 18 * static_cast<double>(gi), 10, 10, col, col);
    c.text(36, 429 + 18 * static_cast<double>(gi), name);
    ++gi;
  }
  c.text(420, 460, "outer ring = " + num(peak), "end");
  return c.str();
}

// Box plot per metric from the validation summary rows (metric, stat,
// value); optional per-configuration RMSE points are overlaid.
inline std::string rmse_boxplot(const csv::Table& summary, const csv::Table* per_config = nullptr) {
  const auto cm = summary.column("metric"), cs = summary.column("stat"), cv = summary.column("value");
  std::map<std::string, std::map<std::string, double>> stats;
  for (const auto& r : summary.rows) stats[r[cm]][r[cs]] = csv::parse_double(r[cv], "value");
  std::map<std::string, std::vector<double>> points;
  if (per_config) {
    const auto pm = per_config->column("metric"), pr = per_config->column("rmse");
    for (const auto& r : per_config->rows)
      if (auto v = csv::parse_opt(r[pr], "rmse")) points[r[pm]].push_back(*v);
  }
  double hi = 1;
  for (const auto& [m, s] : stats)
    if (s.count("max")) hi = std::max(hi, s.at("max"));
  const double left = 60, top = 40, h = 300, slot = 120;
  Canvas c(left + slot * static_cast<double>(std::max<std::size_t>(stats.size(), 1)) + 40, top + h + 60);
  const Axis y{0, hi * 1.1, top + h, top};
  c.text((left + slot * static_cast<double>(stats.size())) / 2, 22, "Validation RMSE per configuration", "middle", 13);
  c.line(left, top, left, top + h);
  for (int k = 0; k <= 4; ++k) {
    const double v = hi * 1.1 * k / 4;
    c.line(left - 4, y(v), left, y(v));
    c.text(left - 6, y(v) + 4, num(v), "end");
  }
  std::size_t i = 0;
  for (const auto& [metric, s] : stats) {
    auto get = [&s](const char* k) { return s.count(k) ? s.at(k) : 0.0; };
    const double cx = left + slot * (static_cast<double>(i) + 0.5);
    c.line(cx, y(get("min")), cx, y(get("max")));
    c.line(cx - 15, y(get("min")), cx + 15, y(get("min")));
    c.line(cx - 15, y(get("max")), cx + 15, y(get("max")));
    c.rect(cx - 30, y(get("q3")), 60, y(get("q1")) - y(get("q3")), "#9ecae1");
    c.line(cx - 30, y(get("median")), cx + 30, y(get("median")), "#08306b", 2);
    c.circle(cx, y(get("mean")), 3.5, "#d1495b");
    for (std::size_t k = 0; k < points[metric].size(); ++k)
      c.circle(cx + 40 + static_cast<double>(k % 3) * 5, y(points[metric][k]), 2, "#555");
    c.text(cx, top + h + 18, metric, "middle");
    ++i;
  }
  c.text(left + 4, top + h + 40, "box: quartiles, line: median, red dot: mean");
  return c.str();
}

// Best-so-far fitness per generation for one or more runs.
inline std::string convergence(const std::vector<std::pair<std::string, csv::Table>>& runs) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, gmax = 1;
  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> series;
  for (const auto& [name, t] : runs) {
    const auto cg = t.column("generation"), cf = t.column("best_fitness");
    std::vector<std::pair<double, double>> s;
    for (const auto& r : t.rows) {
      const double g = csv::parse_double(r[cg], "generation"), f = csv::parse_double(r[cf], "best_fitness");
      if (!std::isfinite(f)) continue;
      s.push_back({g, f});
      lo = std::min(lo, f);
      hi = std::max(hi, f);
      gmax = std::max(gmax, g);
    }
    series.push_back({name, std::move(s)});
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  const auto [a, b] = padded(lo, hi);
  const double left = 70, top = 40, w = 480, h = 280;
  Canvas c(left + w + 160, top + h + 60);
  const Axis x{0, gmax, left, left + w};
  const Axis y{a, b, top + h, top};
  c.text(left + w / 2, 22, "GA convergence (best fitness)", "middle", 13);
  c.line(left, top + h, left + w, top + h);
  c.line(left, top, left, top + h);
  c.text(left, top + h + 16, "0", "middle");
  c.text(left + w, top + h + 16, num(gmax), "middle");
  c.text(left + w / 2, top + h + 34, "generation", "middle");
  c.text(left - 6, top + 4, num(b), "end");
  c.text(left - 6, top + h, num(a), "end");
  const std::vector<std::string> colours = {"#d1495b", "#00798c", "#edae49", "#66a182", "#2e4057", "#8d96a3"};
  for (std::size_t i = 0; i < series.size(); ++i) {
    std::vector<std::pair<double, double>> pts;
    double prev = 0;
    for (std::size_t k = 0; k < series[i].second.size(); ++k) {
      const auto [g, f] = series[i].second[k];
      if (k) pts.push_back({x(g), y(prev)});
      pts.push_back({x(g), y(f)});
      prev = f;
    }
    const auto& col = colours[i % colours.size()];
    c.polyline(pts, col);
    c.rect(left + w + 16, top + 18 * static_cast<double>(i), 10, 10, col, col);
    c.text(left + w + 32, top + 9 + 18 * static_cast<double>(i), series[i].first);
  }
  return c.str();
}

}  // namespace urbancfx::svg
