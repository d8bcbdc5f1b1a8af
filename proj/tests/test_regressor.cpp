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

#include <chrono>
#include <cmath>
#include <sstream>
#include <vector>

#include "evosched/cost_model.hpp"
#include "evosched/regressor.hpp"

namespace {

using namespace evosched::profiler;

struct Split {
  std::vector<TimeSample> train, test;
};

Split split_dataset(std::uint64_t seed) {
  const auto all = evosched::sim::sample_cost_dataset(200, seed);
  Split s;
  s.train.assign(all.begin(), all.begin() + 160);
  s.test.assign(all.begin() + 160, all.end());
  return s;
}

// Shared across tests: training takes about a second.
const TimeRegressor& trained() {
  static const TimeRegressor reg = train_time_regressor(split_dataset(2024).train);
  return reg;
}

TEST(CostModel, Shape) {
  RetrainFeatures f{100, 500, 10, 5, 8};
  const double base = evosched::sim::retrain_cost_seconds(f);
  EXPECT_GT(base, 0.0);
  auto g = f;
  g.data_count *= 2;
  EXPECT_NEAR(evosched::sim::retrain_cost_seconds(g), 2 * base, 1e-9 * base);
  g = f;
  g.batch = 32;
  EXPECT_LT(evosched::sim::retrain_cost_seconds(g), base);
}

TEST(Regressor, HeldOutError) {
  const auto split = split_dataset(2024);
  const double mre = mean_relative_error(trained(), split.test);
  EXPECT_LE(mre, 0.05) << "held-out MRE " << mre;
}

TEST(Regressor, Deterministic) {
  const auto split = split_dataset(2024);
  RegressorOptions opt;
  opt.epochs = 300;
  const auto a = train_time_regressor(split.train, opt);
  const auto b = train_time_regressor(split.train, opt);
  EXPECT_TRUE(a == b);
  opt.seed = 7;
  const auto c = train_time_regressor(split.train, opt);
  EXPECT_FALSE(a == c);
}

TEST(Regressor, ConstantTarget) {
  std::vector<TimeSample> samples;
  auto data = evosched::sim::sample_cost_dataset(60, 3);
  for (auto& s : data) samples.push_back({s.features, 42.0});
  const auto reg = train_time_regressor(samples);
  for (const auto& s : data) EXPECT_NEAR(predict_retraining_time(reg, s.features), 42.0, 0.42);
}

TEST(Regressor, InputChecks) {
  const auto few = evosched::sim::sample_cost_dataset(49, 1);
  EXPECT_THROW(train_time_regressor(few), std::invalid_argument);
  EXPECT_THROW(predict_retraining_time(trained(), {0, 1, 1, 1, 1}), std::invalid_argument);
  EXPECT_THROW(predict_retraining_time(trained(), {1, 1, 1, NAN, 1}), std::invalid_argument);
  EXPECT_THROW((void)TimeRegressor{}.predict({1, 1, 1, 1, 1}), std::logic_error);
  auto bad = evosched::sim::sample_cost_dataset(60, 1);
  bad[5].seconds = -1.0;
  EXPECT_THROW(train_time_regressor(bad), std::invalid_argument);
}

TEST(Regressor, PositiveAndFast) {
  const auto& reg = trained();
  const auto probe = evosched::sim::sample_cost_dataset(1000, 99);
  const auto start = std::chrono::steady_clock::now();
  double sink = 0.0;
  for (const auto& s : probe) {
    const double t = reg.predict(s.features);
    EXPECT_GT(t, 0.0);
    sink += t;
  }
  const double per_call_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count() / 1000.0;
  EXPECT_LT(per_call_ms, 1.0);
  EXPECT_GT(sink, 0.0);
}

TEST(Regressor, SaveLoadRoundTrip) {
  std::stringstream buf;
  trained().save(buf);
  const std::string bytes = buf.str();
  ASSERT_GE(bytes.size(), 9u);
  EXPECT_EQ(bytes.substr(0, 4), "EVTR");
  EXPECT_EQ(bytes[4], 1);  // version 1, little-endian u32
  EXPECT_EQ(bytes[8], 1);  // endianness flag
  std::stringstream in(bytes);
  const auto loaded = TimeRegressor::load(in);
  EXPECT_TRUE(loaded == trained());
  const RetrainFeatures f{50, 300, 12, 10, 16};
  EXPECT_EQ(loaded.predict(f), trained().predict(f));
}

TEST(Regressor, LoadRejectsCorruptFiles) {
  std::stringstream junk("NOPE....");
  EXPECT_THROW(TimeRegressor::load(junk), std::runtime_error);
  std::stringstream buf;
  trained().save(buf);
  std::stringstream truncated(buf.str().substr(0, 100));
  EXPECT_THROW(TimeRegressor::load(truncated), std::runtime_error);
  std::string wrong_version = buf.str();
  wrong_version[4] = 9;
  std::stringstream v(wrong_version);
  EXPECT_THROW(TimeRegressor::load(v), std::runtime_error);
}

TEST(Regressor, Architecture) {
  const auto& layers = trained().layers();
  ASSERT_EQ(layers.size(), 4u);
  EXPECT_EQ(layers[0].in, 5u);
  for (std::size_t l = 0; l < 3; ++l) EXPECT_EQ(layers[l].out, 16u);
  EXPECT_EQ(layers[3].out, 1u);
}

}  // namespace
