/*
 * Copyright (c) 2026 The evosched Authors. All Rights Reserved
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "evosched/sampler.hpp"

namespace {

using namespace evosched::sampler;

std::vector<FrameRecord> frames_at(double fps, double seconds, double t0 = 0.0) {
  std::vector<FrameRecord> out;
  const auto n = static_cast<std::size_t>(std::llround(fps * seconds));
  for (std::size_t i = 0; i < n; ++i) {
    FrameRecord f;
    f.t = t0 + static_cast<double>(i) / fps;
    out.push_back(f);
  }
  return out;
}

void expect_ordered_subset(const std::vector<std::size_t>& sel, std::size_t n) {
  for (std::size_t i = 0; i < sel.size(); ++i) {
    EXPECT_LT(sel[i], n);
    if (i > 0) {
      EXPECT_LT(sel[i - 1], sel[i]);
    }
  }
}

TEST(Sudden, FixedRate) {
  const auto frames = frames_at(30, 10);
  const auto sel = sample_sudden(frames, 0.6);
  ASSERT_EQ(sel.size(), 6u);
  for (std::size_t i = 0; i < sel.size(); ++i) {
    EXPECT_NEAR(frames[sel[i]].t, static_cast<double>(i) / 0.6, 1.0 / 30.0);
  }
  EXPECT_EQ(sel.front(), 0u);
}

TEST(Sudden, RateAboveTraceRateTakesEverything) {
  const auto frames = frames_at(30, 4);
  const auto sel = sample_sudden(frames, 60.0);
  ASSERT_EQ(sel.size(), frames.size());
  for (std::size_t i = 0; i < sel.size(); ++i) EXPECT_EQ(sel[i], i);
}

TEST(Sudden, EmptyAndSingle) {
  EXPECT_TRUE(sample_sudden({}, 0.6).empty());
  const auto one = frames_at(30, 1.0 / 30.0);
  EXPECT_EQ(sample_sudden(one, 0.6), std::vector<std::size_t>{0});
  EXPECT_THROW(sample_sudden(one, 0.0), std::invalid_argument);
}

TEST(Sudden, CountBound) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> fps(1, 60), len(0.5, 400), rate(0.05, 5);
  for (int i = 0; i < 300; ++i) {
    const double f = fps(rng);
    const auto frames = frames_at(f, len(rng), 17.0);
    if (frames.empty()) continue;
    const double r = rate(rng);
    const auto sel = sample_sudden(frames, r);
    const double length = frames.back().t - frames.front().t + 1.0 / f;
    EXPECT_LE(sel.size(), static_cast<std::size_t>(std::ceil(r * length - 1e-9)));
    expect_ordered_subset(sel, frames.size());
  }
}

TEST(LinearRate, WorkedValues) {
  const SamplerConfig cfg;
  EXPECT_DOUBLE_EQ(linear_rate(60, 0, cfg), 0.2);
  EXPECT_DOUBLE_EQ(linear_rate(29, 0, cfg), 0.1);
  EXPECT_DOUBLE_EQ(linear_rate(1e6, 0, cfg), 1.0);
}

TEST(LinearRate, GridMatchesClosedForm) {
  const SamplerConfig cfg;
  double prev = 0.0;
  for (int k = 0; k <= 20000; ++k) {
    const double dt = 0.25 * k;
    const double expected = std::min(1.0, 0.1 + std::floor(dt / 30.0) * 0.05);
    const double got = linear_rate(100.0 + dt, 100.0, cfg);
    EXPECT_EQ(got, expected) << "dt=" << dt;
    EXPECT_GE(got, prev);
    prev = got;
  }
}

// Enumeration oracle: segment k of [t1, end) runs at linear_rate and
// contributes round-half-up(rate * segment length) frames.
std::size_t incremental_count_oracle(double length, const SamplerConfig& cfg) {
  std::size_t total = 0;
  for (int k = 0; k * cfg.segment_seconds < length - 1e-9; ++k) {
    const double seg = std::min(cfg.segment_seconds, length - k * cfg.segment_seconds);
    const double rate = std::min(cfg.r_max, cfg.r0 + k * cfg.delta_r);
    total += static_cast<std::size_t>(std::floor(rate * seg + 0.5 + 1e-9));
  }
  return total;
}

TEST(Incremental, SegmentRates) {
  const SamplerConfig cfg;
  const auto frames = frames_at(30, 90);
  const auto sel = sample_incremental(frames, cfg);
  // 0.1*30 + 0.15*30 + 0.2*30 = 3 + 4.5 + 6, with 4.5 rounding up.
  EXPECT_EQ(sel.size(), 14u);
  EXPECT_EQ(sel.size(), incremental_count_oracle(90, cfg));
  std::size_t per_segment[3] = {0, 0, 0};
  for (auto i : sel) ++per_segment[static_cast<int>(frames[i].t / 30.0)];
  EXPECT_EQ(per_segment[0], 3u);
  EXPECT_EQ(per_segment[1], 5u);
  EXPECT_EQ(per_segment[2], 6u);
}

TEST(Incremental, ShortIntervalUsesBaseRate) {
  const SamplerConfig cfg;
  const auto frames = frames_at(30, 20);
  EXPECT_EQ(sample_incremental(frames, cfg).size(), 2u);
}

TEST(Incremental, CountMatchesOracle) {
  const SamplerConfig cfg;
  for (double len : {30.0, 45.0, 60.0, 150.0, 300.0, 600.0, 1200.0}) {
    const auto frames = frames_at(30, len, 5.0);
    const auto sel = sample_incremental(frames, cfg);
    EXPECT_EQ(sel.size(), incremental_count_oracle(len, cfg)) << "length " << len;
    expect_ordered_subset(sel, frames.size());
  }
}

Detection box(int category, std::vector<double> z) { return {category, 0.9, std::move(z)}; }

TEST(FeatureDeviation, WorkedValues) {
  GlobalFeatureModel g;
  g.centroids[0] = {{3.0, 4.0}};
  g.centroids[1] = {{0.0, 0.0}};
  FrameRecord f;
  f.detections = {box(0, {3.0, 4.0})};
  EXPECT_DOUBLE_EQ(feature_deviation(f, g), 0.0);
  f.detections = {box(0, {0.0, 0.0})};
  EXPECT_DOUBLE_EQ(feature_deviation(f, g), 5.0);
  // Category means 2 and 4 average to 3.
  f.detections = {box(0, {3.0, 6.0}), box(1, {0.0, 4.0})};
  EXPECT_DOUBLE_EQ(feature_deviation(f, g), 3.0);
  f.detections.clear();
  EXPECT_DOUBLE_EQ(feature_deviation(f, g), 0.0);
}

TEST(FeatureDeviation, UnknownCategoryIsNamed) {
  GlobalFeatureModel g;
  g.centroids[0] = {{0.0}};
  FrameRecord f;
  f.detections = {box(7, {1.0})};
  try {
    feature_deviation(f, g);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("7"), std::string::npos);
  }
}

TEST(FeatureDeviation, MatchingAndPermutation) {
  GlobalFeatureModel g;
  g.centroids[0] = {{0.0, 0.0}, {10.0, 0.0}};
  FrameRecord f;
  f.detections = {box(0, {10.0, 1.0}), box(0, {0.0, 2.0})};
  EXPECT_DOUBLE_EQ(feature_deviation(f, g), 1.5);
  std::swap(f.detections[0], f.detections[1]);
  EXPECT_DOUBLE_EQ(feature_deviation(f, g), 1.5);
  // Extra box beyond the centroid count is left unmatched.
  f.detections.push_back(box(0, {50.0, 50.0}));
  EXPECT_DOUBLE_EQ(feature_deviation(f, g), 1.5);
}

TEST(FeatureDeviation, PermutationInvariantRandom) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 1.0);
  GlobalFeatureModel g;
  for (int c = 0; c < 3; ++c) {
    for (int k = 0; k < 3; ++k) g.centroids[c].push_back({n(rng), n(rng), n(rng)});
  }
  for (int trial = 0; trial < 200; ++trial) {
    FrameRecord f;
    for (int c = 0; c < 3; ++c) {
      for (int k = 0; k < 3; ++k) f.detections.push_back(box(c, {n(rng), n(rng), n(rng)}));
    }
    const double base = feature_deviation(f, g);
    EXPECT_GE(base, 0.0);
    std::shuffle(f.detections.begin(), f.detections.end(), rng);
    EXPECT_DOUBLE_EQ(feature_deviation(f, g), base);
  }
}

TEST(Gradual, AllRedundant) {
  SamplerConfig cfg;
  GlobalFeatureModel g;
  g.centroids[0] = {{0.0}};
  auto frames = frames_at(30, 2);
  for (auto& f : frames) f.detections = {box(0, {5.0})};
  EXPECT_TRUE(sample_gradual(frames, cfg, g).empty());
}

TEST(Gradual, AllOnCentroid) {
  SamplerConfig cfg;
  GlobalFeatureModel g;
  g.centroids[0] = {{1.0, 1.0}};
  auto frames = frames_at(30, 2);
  for (auto& f : frames) {
    f.pixel_diff = 200.0;
    f.detections = {box(0, {1.0, 1.0})};
  }
  EXPECT_TRUE(sample_gradual(frames, cfg, g).empty());
}

TEST(Gradual, MatchesTwoStageOracle) {
  SamplerConfig cfg;
  GlobalFeatureModel g;
  g.centroids[0] = {{0.0, 0.0}};
  g.centroids[1] = {{1.0, 1.0}};
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> pd(0.0, 1.2), off(-0.4, 0.4);
  auto frames = frames_at(10, 60);
  for (auto& f : frames) {
    f.pixel_diff = pd(rng);
    f.detections = {box(0, {off(rng), off(rng)}), box(1, {1.0 + off(rng), 1.0 + off(rng)})};
  }
  // One box per category: D is the mean of the two Euclidean distances.
  std::vector<std::size_t> expected;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& d = frames[i].detections;
    const double d0 = std::hypot(d[0].feature[0], d[0].feature[1]);
    const double d1 = std::hypot(d[1].feature[0] - 1.0, d[1].feature[1] - 1.0);
    const bool distinct = frames[i].pixel_diff * 1280.0 * 720.0 >= 1280.0 * 720.0 * 0.55;
    if (distinct && (d0 + d1) / 2.0 > 0.2) expected.push_back(i);
  }
  ASSERT_FALSE(expected.empty());
  ASSERT_LT(expected.size(), frames.size());
  EXPECT_EQ(sample_gradual(frames, cfg, g), expected);
}

TEST(Dispatch, ByType) {
  SamplerConfig cfg;
  GlobalFeatureModel g;
  const auto frames = frames_at(30, 90);
  EXPECT_EQ(sample_for(DriftType::Sudden, frames, cfg, g), sample_sudden(frames, cfg.r_f));
  EXPECT_EQ(sample_for(DriftType::Incremental, frames, cfg, g), sample_incremental(frames, cfg));
  EXPECT_TRUE(sample_for(DriftType::Gradual, frames, cfg, g).empty());
}

TEST(Manifest, Csv) {
  const auto frames = frames_at(2, 3);
  const std::vector<std::size_t> sel{0, 3};
  std::ostringstream os;
  write_manifest(os, frames, sel, 100);
  EXPECT_EQ(os.str(), "frame_index,timestamp\n100,0\n103,1.5\n");
}

TEST(Config, Validation) {
  SamplerConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.r0 = 2.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.eps2 = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

}  // namespace
