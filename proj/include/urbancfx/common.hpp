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

// Shared vocabulary: feature layout, error types, seeding and a small
// deterministic parallel-for.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace urbancfx {

inline constexpr std::string_view kVersion = "0.1.0";

// Errors. DomainError maps to CLI exit code 1, ConfigError/IoError to 2.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Compass sectors, clockwise from north.
enum class Direction : int { kN = 0, kNE, kE, kSE, kS, kSW, kW, kNW };

inline constexpr int kNumDirections = 8;
inline constexpr std::array<std::string_view, kNumDirections> kDirectionNames = {
    "N", "NE", "E", "SE", "S", "SW", "W", "NW"};

// Column layout of the 21-feature vector (also the CSV order).
inline constexpr std::size_t kNumFeatures = 21;
inline constexpr std::size_t kOrientation = 0;
inline constexpr std::size_t kStreetWidth = 1;
inline constexpr std::size_t kBuildingWidth = 2;
inline constexpr std::size_t kBuildingLength = 3;
inline constexpr std::size_t kParkArea = 4;
inline constexpr std::size_t kHeightBase = 5;
inline constexpr std::size_t kDistanceBase = 13;

constexpr std::size_t height_index(int dir) { return kHeightBase + static_cast<std::size_t>(dir); }
constexpr std::size_t distance_index(int dir) { return kDistanceBase + static_cast<std::size_t>(dir); }
constexpr bool is_height_feature(std::size_t f) { return f >= kHeightBase && f < kDistanceBase; }
constexpr bool is_distance_feature(std::size_t f) {
  return f >= kDistanceBase && f < kNumFeatures;
}

inline const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = {"orientation_deg", "street_width_m", "building_width_m",
                                  "building_length_m", "park_area_m2"};
    for (auto d : kDirectionNames) n.push_back("h" + std::string(d));
    for (auto d : kDirectionNames) n.push_back("d" + std::string(d));
    return n;
  }();
  return names;
}

inline constexpr double kStoryHeight = 3.5;

// SplitMix64 finalizer; used to derive independent per-index seeds.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// FNV-1a, used for config and model fingerprints.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
  return s;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers using static
// contiguous chunks. Results must be written by index; the first exception
// thrown (lowest chunk) is rethrown after all workers join.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(n, lo + chunk);
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Row-major dense matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  void push_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw DomainError("Matrix::push_row: width mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  Matrix select_rows(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto src = row(idx[i]);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
  }

  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace urbancfx
