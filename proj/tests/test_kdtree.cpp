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

#include <algorithm>
#include <random>
#include <set>

#include "urbancfx/kdtree.hpp"

namespace urbancfx {
namespace {

struct WeightedL1 {
  double lambda = 0.1;
  double operator()(std::size_t d, double delta) const {
    return (1.0 + 0.5 * static_cast<double>(d)) * delta + (delta > 0 ? lambda : 0.0);
  }
};

std::vector<double> random_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> p(n * dim);
  for (auto& v : p) v = std::floor(u(rng) * 8) / 8;  // lattice values create ties
  return p;
}

TEST(KdTree, KnnMatchesBruteForce) {
  const std::size_t n = 500, dim = 4;
  const auto pts = random_points(n, dim, 1);
  const KdTree tree(pts, dim, 4);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int q = 0; q < 30; ++q) {
    std::vector<double> query(dim);
    for (auto& v : query) v = u(rng);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t k = 0; k < dim; ++k) s += (pts[i * dim + k] - query[k]) * (pts[i * dim + k] - query[k]);
      d[i] = std::sqrt(s);
    }
    auto sorted = d;
    std::sort(sorted.begin(), sorted.end());
    const auto nn = tree.knn(query, 7);
    ASSERT_EQ(nn.size(), 7u);
    for (std::size_t k = 0; k < nn.size(); ++k) {
      EXPECT_NEAR(nn[k].cost, sorted[k], 1e-12);
      EXPECT_NEAR(d[nn[k].index], nn[k].cost, 1e-12);
    }
  }
}

TEST(KdTree, SearchEnumeratesAllPointsInCostOrder) {
  const std::size_t n = 300, dim = 3;
  const auto pts = random_points(n, dim, 4);
  const KdTree tree(pts, dim);
  const std::vector<double> query = {0.3, 0.55, 0.9};
  auto s = tree.search(query, WeightedL1{});
  std::set<std::size_t> seen;
  double prev = -1;
  while (auto nb = s.next()) {
    EXPECT_GE(nb->cost, prev);
    prev = nb->cost;
    double c = 0;
    for (std::size_t k = 0; k < dim; ++k) c += WeightedL1{}(k, std::abs(pts[nb->index * dim + k] - query[k]));
    EXPECT_NEAR(nb->cost, c, 1e-12);
    EXPECT_TRUE(seen.insert(nb->index).second);
  }
  EXPECT_EQ(seen.size(), n);
  EXPECT_EQ(s.visited_points(), n);
}

TEST(KdTree, HandlesDuplicatesAndEmpty) {
  const KdTree dup(std::vector<double>(20, 1.0), 2);
  EXPECT_EQ(dup.knn(std::vector<double>{1.0, 1.0}, 3).size(), 3u);
  const KdTree empty(std::vector<double>{}, 2);
  auto s = empty.search(std::vector<double>{0, 0}, SquaredEuclidean{});
  EXPECT_FALSE(s.next().has_value());
}

TEST(KdTree, RejectsBadShapes) {
  EXPECT_THROW(KdTree(std::vector<double>(5, 0.0), 2), std::invalid_argument);
  const KdTree t(std::vector<double>(4, 0.0), 2);
  EXPECT_THROW(t.knn(std::vector<double>{0.0}, 1), std::invalid_argument);
}

}  // namespace
}  // namespace urbancfx
