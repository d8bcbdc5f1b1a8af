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
#include <sstream>
#include <vector>

#include "evosched/trace.hpp"

namespace {

using namespace evosched::sim;
using evosched::drift::DriftType;
using evosched::drift::FrameRecord;

MobileEndSpec end_with(std::vector<DriftEventSpec> events) {
  MobileEndSpec spec;
  spec.id = 1;
  spec.drift_events = std::move(events);
  return spec;
}

double mean_clc(const std::vector<FrameRecord>& frames, double from, double to) {
  double s = 0.0;
  int n = 0;
  for (const auto& f : frames) {
    if (f.t >= from && f.t < to) {
      s += evosched::drift::clc(f);
      ++n;
    }
  }
  return s / n;
}

std::vector<FrameRecord> between(const std::vector<FrameRecord>& frames, double from, double to) {
  std::vector<FrameRecord> out;
  for (const auto& f : frames) {
    if (f.t >= from && f.t < to) out.push_back(f);
  }
  return out;
}

TEST(GenTrace, FrameCountAndSpacing) {
  const auto frames = gen_trace(end_with({}), 1, 10.0);
  ASSERT_EQ(frames.size(), 300u);
  EXPECT_DOUBLE_EQ(frames[0].t, 0.0);
  EXPECT_NEAR(frames[299].t, 299.0 / 30.0, 1e-12);
  for (const auto& f : frames) {
    EXPECT_EQ(f.detections.size(), 4u);
    EXPECT_NEAR(evosched::drift::clc(f), f.cc * f.lc, 0.0);
    EXPECT_GE(f.pixel_diff, 0.0);
  }
}

TEST(GenTrace, SuddenStep) {
  const auto frames = gen_trace(end_with({{100.0, DriftType::Sudden, 0.5}}), 4, 200.0);
  EXPECT_NEAR(mean_clc(frames, 0.0, 100.0), 0.8, 0.01);
  EXPECT_NEAR(mean_clc(frames, 100.0, 200.0), 0.3, 0.01);
  // The first frame at or after the event already sits at the new level.
  EXPECT_NEAR(mean_clc(frames, 100.0, 100.0 + 1.0 / 30.0), 0.3, 0.05);
  EXPECT_NEAR(mean_clc(frames, 100.0 - 1.0 / 30.0, 100.0), 0.8, 0.15);
}

TEST(GenTrace, NoEventsConstantMean) {
  const auto spec = end_with({});
  const auto frames = gen_trace(spec, 9, 300.0);
  for (double from = 0.0; from < 300.0; from += 60.0) {
    EXPECT_NEAR(mean_clc(frames, from, from + 60.0), spec.base_accuracy, 0.005);
  }
  double ss = 0.0;
  for (const auto& f : frames) ss += std::pow(evosched::drift::clc(f) - spec.base_accuracy, 2);
  EXPECT_NEAR(std::sqrt(ss / static_cast<double>(frames.size())), spec.clc_noise, 0.003);
}

TEST(GenTrace, IncrementalRamp) {
  const auto frames = gen_trace(end_with({{60.0, DriftType::Incremental, 0.4, 100.0}}), 2, 240.0);
  EXPECT_NEAR(mean_clc(frames, 105.0, 115.0), 0.8 - 0.2, 0.01);
  EXPECT_NEAR(mean_clc(frames, 170.0, 240.0), 0.4, 0.01);
  double prev = 1.0;
  for (double from = 60.0; from < 160.0; from += 10.0) {
    const double m = mean_clc(frames, from, from + 10.0);
    EXPECT_LT(m, prev);
    prev = m;
  }
}

TEST(GenTrace, GradualEarlyHalfStaysNearReference) {
  const double t0 = 100.0, length = 120.0;
  const auto spec = end_with({{t0, DriftType::Gradual, 0.4, length}});
  const evosched::drift::DetectorConfig detector;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto frames = gen_trace(spec, seed, 400.0);
    const auto reference = between(frames, 0.0, 100.0);
    const auto early = between(frames, t0, t0 + length / 2);
    const auto settled = between(frames, t0 + length, 400.0);
    const double d0 = detector.d0_factor * evosched::drift::distribution_distance(settled, reference);
    EXPECT_LT(evosched::drift::distribution_distance(early, reference), d0) << "seed " << seed;
  }
}

TEST(GenTrace, GradualMixesTwoRegimes) {
  const auto frames = gen_trace(end_with({{50.0, DriftType::Gradual, 0.4, 100.0}}), 6, 200.0);
  int old_regime = 0, new_regime = 0;
  for (const auto& f : between(frames, 50.0, 100.0)) {
    const double v = evosched::drift::clc(f);
    old_regime += std::abs(v - 0.8) < 0.1;
    new_regime += std::abs(v - 0.4) < 0.1;
  }
  EXPECT_GT(old_regime, 0);
  EXPECT_GT(new_regime, 0);
  EXPECT_GE(old_regime + new_regime, 1490);
  EXPECT_NEAR(mean_clc(frames, 150.0, 200.0), 0.4, 0.01);
}

TEST(GenTrace, DeterministicPerSeed) {
  const auto spec = end_with({{30.0, DriftType::Sudden, 0.3}});
  std::ostringstream a, b, c;
  write_trace_csv(a, gen_trace(spec, 5, 60.0), spec.feature_dim);
  write_trace_csv(b, gen_trace(spec, 5, 60.0), spec.feature_dim);
  write_trace_csv(c, gen_trace(spec, 6, 60.0), spec.feature_dim);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), c.str());
}

TEST(GenTrace, EndStreamsIndependent) {
  auto one = end_with({});
  auto two = one;
  two.id = 2;
  const auto a = gen_trace(one, 5, 5.0);
  const auto b = gen_trace(two, 5, 5.0);
  EXPECT_NE(a[10].cc, b[10].cc);
  // Another end's existence never enters this end's stream.
  EXPECT_EQ(gen_trace(one, 5, 5.0)[10].cc, a[10].cc);
}

TEST(TraceCsv, RoundTrip) {
  const auto spec = end_with({{20.0, DriftType::Incremental, 0.3, 20.0}});
  const auto frames = gen_trace(spec, 3, 60.0);
  std::stringstream ss;
  write_trace_csv(ss, frames, spec.feature_dim);
  const auto text = ss.str();
  std::istringstream in(text);
  const auto back = read_trace_csv(in);
  ASSERT_EQ(back.size(), frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    EXPECT_NEAR(back[i].t, frames[i].t, 1e-9 * std::max(1.0, frames[i].t));
    EXPECT_NEAR(back[i].cc, frames[i].cc, 1e-9);
    EXPECT_NEAR(back[i].pixel_diff, frames[i].pixel_diff, 1e-8);
    ASSERT_EQ(back[i].detections.size(), frames[i].detections.size());
    EXPECT_EQ(back[i].detections[3].category, frames[i].detections[3].category);
    EXPECT_NEAR(back[i].detections[3].feature[2], frames[i].detections[3].feature[2], 1e-9);
  }
  std::ostringstream again;
  write_trace_csv(again, back, spec.feature_dim);
  EXPECT_EQ(again.str(), text);
}

std::size_t error_row(const std::string& text) {
  std::istringstream in(text);
  try {
    (void)read_trace_csv(in);
  } catch (const TraceFormatError& e) {
    return e.line();
  }
  ADD_FAILURE() << "no error raised";
  return 0;
}

TEST(TraceCsv, ErrorsNameTheRow) {
  const std::string head = "# evosched trace v1 feature_dim=1\nt,cc,lc,pixel_diff,n_det,detections\n";
  EXPECT_EQ(error_row(""), 1u);
  EXPECT_EQ(error_row("t,cc\n"), 1u);
  EXPECT_EQ(error_row("# evosched trace v1 feature_dim=1\nwrong\n"), 2u);
  EXPECT_EQ(error_row(head + "0,0.9,0.9,1,0\n0.1,0.9,abc,1,0\n"), 4u);
  EXPECT_EQ(error_row(head + "0,0.9,0.9,1,0\n0,0.9,0.9,1,0\n"), 4u);
  EXPECT_EQ(error_row(head + "0,1.5,0.9,1,0\n"), 3u);
  EXPECT_EQ(error_row(head + "0,0.9,0.9,-1,0\n"), 3u);
  EXPECT_EQ(error_row(head + "0,0.9,0.9,1,1,0,0.8\n"), 3u);
  EXPECT_EQ(error_row(head + "0,0.9,0.9,1,1,0.5,0.8,0.1\n"), 3u);
  EXPECT_EQ(error_row(head + "0,0.9,0.9,1\n"), 3u);

  std::istringstream ok(head + "0,0.9,0.9,1,1,0,0.8,0.1\n\n0.5,0.8,0.8,2,0\n");
  const auto frames = read_trace_csv(ok);
  ASSERT_EQ(frames.size(), 2u);
  EXPECT_EQ(frames[0].detections.size(), 1u);
}

}  // namespace
