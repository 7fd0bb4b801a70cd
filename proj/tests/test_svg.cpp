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

#include <gtest/gtest.h>

#include "urbancfx/svg.hpp"

namespace urbancfx {
namespace {

// Tag nesting check: every opened element is closed in order.
bool well_formed(const std::string& s) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  while ((i = s.find('<', i)) != std::string::npos) {
    const auto j = s.find('>', i);
    if (j == std::string::npos) return false;
    const std::string tag = s.substr(i + 1, j - i - 1);
    i = j + 1;
    if (tag.starts_with("!--") || tag.starts_with("?")) continue;
    if (tag.ends_with("/")) continue;
    const std::string name = tag.substr(tag.starts_with("/") ? 1 : 0, tag.find_first_of(" /", 1) - (tag.starts_with("/") ? 1 : 0));
    if (tag.starts_with("/")) {
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
    } else {
      stack.push_back(name);
    }
  }
  return stack.empty();
}

std::size_t count(const std::string& s, const std::string& what) {
  std::size_t n = 0;
  for (auto i = s.find(what); i != std::string::npos; i = s.find(what, i + 1)) ++n;
  return n;
}

csv::Table beeswarm_table() {
  csv::Table t;
  t.header = {"feature", "rank", "instance", "value", "phi"};
  for (int rank = 1; rank <= 20; ++rank)
    for (int i = 0; i < 4; ++i)
      t.rows.push_back({"f<" + std::to_string(rank) + ">", std::to_string(rank), std::to_string(i), std::to_string(i),
                        std::to_string(0.1 * (rank - i))});
  return t;
}

TEST(Svg, BeeswarmDrawsTopFeatures) {
  const auto s = svg::beeswarm(beeswarm_table(), 15);
  EXPECT_TRUE(s.starts_with("<svg"));
  EXPECT_TRUE(well_formed(s));
  EXPECT_EQ(count(s, "<circle"), 15u * 4u);
  EXPECT_NE(s.find("f&lt;1&gt;"), std::string::npos);
  EXPECT_EQ(s.find("f&lt;16&gt;"), std::string::npos);
  EXPECT_EQ(s, svg::beeswarm(beeswarm_table(), 15));
}

TEST(Svg, CircularChart) {
  csv::Table t;
  t.header = {"group", "direction", "feature", "mean_abs_phi"};
  for (const char* g : {"height", "distance"})
    for (auto d : kDirectionNames) t.rows.push_back({g, std::string(d), "x", "0.5"});
  const auto s = svg::circular(t);
  EXPECT_TRUE(well_formed(s));
  EXPECT_EQ(count(s, "<polygon"), 4u + 2u);
  t.rows.push_back({"height", "UP", "x", "1"});
  EXPECT_THROW(svg::circular(t), IoError);
}

TEST(Svg, BoxplotAndConvergence) {
  csv::Table summary;
  summary.header = {"metric", "stat", "value"};
  for (auto [k, v] : std::vector<std::pair<std::string, std::string>>{
           {"min", "1"}, {"q1", "2"}, {"median", "3"}, {"q3", "4"}, {"max", "6"}, {"mean", "3.2"}})
    summary.rows.push_back({"svf", k, v});
  csv::Table per;
  per.header = {"config_id", "metric", "n", "infeasible", "rmse"};
  per.rows = {{"1", "svf", "3", "0", "2.5"}, {"2", "svf", "0", "2", ""}};
  const auto box = svg::rmse_boxplot(summary, &per);
  EXPECT_TRUE(well_formed(box));
  EXPECT_EQ(count(box, "<circle"), 2u);  // mean + one configuration

  csv::Table h;
  h.header = {"generation", "best_fitness"};
  h.rows = {{"0", "-inf"}, {"1", "-3.5"}, {"2", "-1.25"}};
  const auto conv = svg::convergence({{"oracle", h}, {"surrogate", h}});
  EXPECT_TRUE(well_formed(conv));
  EXPECT_EQ(count(conv, "<polyline"), 2u);
}

TEST(Svg, MissingColumnIsIoError) {
  csv::Table t;
  t.header = {"feature", "value"};
  EXPECT_THROW(svg::beeswarm(t), IoError);
  EXPECT_THROW(svg::convergence({{"x", t}}), IoError);
  EXPECT_THROW(svg::rmse_boxplot(t), IoError);
}

}  // namespace
}  // namespace urbancfx
