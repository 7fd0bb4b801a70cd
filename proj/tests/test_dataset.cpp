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

#include <filesystem>
#include <fstream>

#include "test_support.hpp"

namespace urbancfx {
namespace {

std::string temp_file(const std::string& name, const std::string& body) {
  const auto p = std::filesystem::temp_directory_path() / ("urbancfx_" + name);
  std::ofstream(p) << body;
  return p.string();
}

TEST(Dataset, CsvRoundTripIsExact) {
  const auto& w = testing::small_world();
  const auto path = temp_file("dataset.csv", dataset_to_csv(w.data, "# provenance"));
  const auto back = read_dataset(path);
  ASSERT_EQ(back.size(), w.data.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back.rows[i].scenario, w.data.rows[i].scenario);
    EXPECT_EQ(back.rows[i].svf, w.data.rows[i].svf);
    EXPECT_EQ(back.rows[i].visibility, w.data.rows[i].visibility);
    EXPECT_EQ(back.rows[i].visibility_class, w.data.rows[i].visibility_class);
  }
  EXPECT_EQ(dataset_to_csv(back), dataset_to_csv(w.data));
}

TEST(Dataset, RowsFollowSimulation) {
  const auto& w = testing::small_world();
  ASSERT_GT(w.data.size(), 200u);
  for (const auto& r : w.data.rows) {
    ASSERT_TRUE(r.complete());
    EXPECT_GE(*r.svf, 0);
    EXPECT_LE(*r.svf, 100);
    EXPECT_EQ(*r.visibility_class, classify_visibility(*r.visibility));
  }
  EXPECT_EQ(w.train.size() + w.test.size(), w.data.size());
}

TEST(Dataset, ThreadedSimulationMatchesSerial) {
  const auto& w = testing::small_world();
  const std::vector<std::pair<UrbanScenario, Scene>> few(w.pairs.begin(), w.pairs.begin() + 12);
  EXPECT_EQ(dataset_to_csv(simulate_dataset(few, testing::fast_sampler(), 1)),
            dataset_to_csv(simulate_dataset(few, testing::fast_sampler(), 3)));
}

TEST(Dataset, CompleteRowsDropMissingTargets) {
  Dataset d;
  DatasetRow a, b;
  a.svf = 50;
  a.visibility = 60;
  a.visibility_class = 1;
  b.svf = 40;
  d.rows = {a, b};
  EXPECT_EQ(d.complete_rows().size(), 1u);
  EXPECT_THROW(d.class_targets(), DomainError);
  EXPECT_EQ(d.visibility_targets()[1], 0.0);
}

TEST(Dataset, FeatureMatrixImputesAbsentDistance) {
  Dataset d;
  DatasetRow r;
  r.scenario.heights[3] = 5;
  r.scenario.distances[3] = 7;
  d.rows.push_back(r);
  const auto m = d.features();
  EXPECT_EQ(m.rows(), 1u);
  EXPECT_EQ(m(0, distance_index(3)), 7);
  EXPECT_EQ(m(0, distance_index(0)), kAbsentDistance);
  EXPECT_EQ(Dataset{}.features().cols(), kNumFeatures);
}

TEST(Dataset, SchemaMismatchIsIoError) {
  EXPECT_THROW(read_dataset(temp_file("bad.csv", "a,b\n1,2\n")), IoError);
  EXPECT_THROW(read_dataset("/nonexistent/dataset.csv"), IoError);
  EXPECT_THROW(simulate_dataset({}), DomainError);
}

}  // namespace
}  // namespace urbancfx
