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

// Static KD-tree with incremental best-first search under any separable
// cost sum_i g_i(|q_i - p_i|) where each g_i is non-decreasing. Points come
// out in exact (cost, index) order, so the first feasible point of a
// filtered walk is the cheapest feasible point of the whole set.

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

namespace urbancfx {

template <class C>
concept SeparableCost = requires(const C& c, std::size_t dim, double delta) {
  { c(dim, delta) } -> std::convertible_to<double>;
};

// Squared Euclidean distance.
struct SquaredEuclidean {
  double operator()(std::size_t, double delta) const { return delta * delta; }
};

struct Neighbor {
  std::size_t index = 0;
  double cost = 0.0;
};

class KdTree {
 public:
  KdTree() = default;

  // `points` is row-major with `dim` columns.
  KdTree(std::vector<double> points, std::size_t dim, std::size_t leaf_size = 8)
      : dim_(dim), leaf_size_(std::max<std::size_t>(1, leaf_size)), points_(std::move(points)) {
    if (dim_ == 0 || points_.size() % dim_ != 0)
      throw std::invalid_argument("KdTree: point buffer does not match dimension");
    n_ = points_.size() / dim_;
    perm_.resize(n_);
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    if (n_ > 0) build(0, n_);
  }

  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> point(std::size_t i) const { return {points_.data() + i * dim_, dim_}; }

  template <SeparableCost Cost>
  class Search {
   public:
    Search(const KdTree& tree, std::span<const double> query, Cost cost)
        : tree_(&tree), query_(query.begin(), query.end()), cost_(std::move(cost)) {
      if (query_.size() != tree.dim_) throw std::invalid_argument("KdTree: query dimension");
      if (tree.n_ > 0) heap_.push({box_bound(0), 0, 0});
    }

    // Next point in non-decreasing cost order, or nullopt when exhausted.
    std::optional<Neighbor> next() {
      while (!heap_.empty()) {
        const Entry e = heap_.top();
        heap_.pop();
        if (e.kind == 1) {
          ++visited_points_;
          return Neighbor{e.id, e.bound};
        }
        const Node& node = tree_->nodes_[e.id];
        if (node.left < 0) {
          for (std::size_t k = node.begin; k < node.end; ++k) {
            const std::size_t p = tree_->perm_[k];
            heap_.push({point_cost(p), 1, p});
          }
        } else {
          heap_.push({box_bound(static_cast<std::size_t>(node.left)), 0,
                      static_cast<std::size_t>(node.left)});
          heap_.push({box_bound(static_cast<std::size_t>(node.right)), 0,
                      static_cast<std::size_t>(node.right)});
        }
      }
      return std::nullopt;
    }

    std::size_t visited_points() const { return visited_points_; }

   private:
    struct Entry {
      double bound;
      int kind;  // 0 = node, 1 = point; nodes first on equal bounds
      std::size_t id;
      bool operator>(const Entry& o) const {
        if (bound != o.bound) return bound > o.bound;
        if (kind != o.kind) return kind > o.kind;
        return id > o.id;
      }
    };

    double point_cost(std::size_t p) const {
      const auto pt = tree_->point(p);
      double c = 0.0;
      for (std::size_t d = 0; d < query_.size(); ++d) c += cost_(d, std::abs(pt[d] - query_[d]));
      return c;
    }

    double box_bound(std::size_t node_id) const {
      const Node& node = tree_->nodes_[node_id];
      double c = 0.0;
      for (std::size_t d = 0; d < query_.size(); ++d) {
        const double lo = tree_->bounds_[node.bounds + d];
        const double hi = tree_->bounds_[node.bounds + query_.size() + d];
        const double gap = query_[d] < lo ? lo - query_[d] : (query_[d] > hi ? query_[d] - hi : 0.0);
        c += cost_(d, gap);
      }
      return c;
    }

    const KdTree* tree_;
    std::vector<double> query_;
    Cost cost_;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
    std::size_t visited_points_ = 0;
  };

  template <SeparableCost Cost>
  Search<Cost> search(std::span<const double> query, Cost cost) const {
    return Search<Cost>(*this, query, std::move(cost));
  }

  // k nearest neighbours by Euclidean distance (cost reported as distance).
  std::vector<Neighbor> knn(std::span<const double> query, std::size_t k) const {
    auto s = search(query, SquaredEuclidean{});
    std::vector<Neighbor> out;
    while (out.size() < k) {
      auto n = s.next();
      if (!n) break;
      n->cost = std::sqrt(n->cost);
      out.push_back(*n);
    }
    return out;
  }

 private:
  struct Node {
    std::size_t begin = 0, end = 0;
    std::size_t bounds = 0;  // offset into bounds_: lo[dim] then hi[dim]
    long left = -1, right = -1;
  };

  std::size_t build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({begin, end, bounds_.size(), -1, -1});
    std::vector<double> lo(dim_, 0.0), hi(dim_, 0.0);
    for (std::size_t d = 0; d < dim_; ++d) {
      lo[d] = hi[d] = points_[perm_[begin] * dim_ + d];
      for (std::size_t k = begin + 1; k < end; ++k) {
        const double v = points_[perm_[k] * dim_ + d];
        lo[d] = std::min(lo[d], v);
        hi[d] = std::max(hi[d], v);
      }
    }
    bounds_.insert(bounds_.end(), lo.begin(), lo.end());
    bounds_.insert(bounds_.end(), hi.begin(), hi.end());
    if (end - begin <= leaf_size_) return id;

    std::size_t split = 0;
    for (std::size_t d = 1; d < dim_; ++d)
      if (hi[d] - lo[d] > hi[split] - lo[split]) split = d;
    if (hi[split] == lo[split]) return id;  // all points identical

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(perm_.begin() + static_cast<long>(begin), perm_.begin() + static_cast<long>(mid),
                     perm_.begin() + static_cast<long>(end), [&](std::size_t a, std::size_t b) {
                       const double va = points_[a * dim_ + split], vb = points_[b * dim_ + split];
                       return va != vb ? va < vb : a < b;
                     });
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    nodes_[id].left = static_cast<long>(left);
    nodes_[id].right = static_cast<long>(right);
    return id;
  }

  std::size_t dim_ = 0;
  std::size_t n_ = 0;
  std::size_t leaf_size_ = 8;
  std::vector<double> points_;
  std::vector<std::size_t> perm_;
  std::vector<Node> nodes_;
  std::vector<double> bounds_;
};

}  // namespace urbancfx
