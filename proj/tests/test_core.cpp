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
#include <vector>

#include "evosched/core.hpp"

namespace {

using namespace evosched::core;

// Independent form of the urgency curve: atan(x) + pi/2 == acos(-x / sqrt(1 + x^2)).
long double urgency_oracle(long double ratio) {
  const long double pi = 3.141592653589793238462643383279502884L;
  const long double x = pi * (ratio - 0.8L);
  return 100.0L / pi * std::acos(-x / std::sqrt(1.0L + x * x));
}

LifeCycle cycle(double acc, double infer, double retrain) {
  LifeCycle c;
  c.avg_accuracy = acc;
  c.t_infer = infer;
  c.t_retrain = retrain;
  return c;
}

TEST(Qoe, WorkedValues) {
  EXPECT_DOUBLE_EQ(qoe_single(cycle(0.5, 300, 100)), 0.375);
  EXPECT_DOUBLE_EQ(qoe_single(cycle(1.0, 100, 0)), 1.0);
  EXPECT_NEAR(qoe_single(cycle(0.7, 330.7, 69.3)), 0.578725, 1e-12);
}

TEST(Qoe, EvolvingTimeIsPhaseSum) {
  LifeCycle c;
  c.t_upload = 1.5;
  c.t_schedule = 2.25;
  c.t_retrain = 30;
  c.t_download = 0.75;
  c.t_infer = 100;
  EXPECT_DOUBLE_EQ(c.evolving_time(), 34.5);
  EXPECT_DOUBLE_EQ(c.length(), 134.5);
}

TEST(Qoe, RejectsDegenerateCycles) {
  EXPECT_THROW(qoe_single(cycle(0.5, 0, 0)), std::domain_error);
  EXPECT_THROW(qoe_single(cycle(0.5, -1, 10)), std::domain_error);
}

TEST(Qoe, Monotonicity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> acc(0.05, 0.5), t(1.0, 500.0), bump(0.01, 50.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = acc(rng), ti = t(rng), tr = t(rng), d = bump(rng);
    const double base = qoe_single(cycle(a, ti, tr));
    EXPECT_LT(base, qoe_single(cycle(a + d / 100.0, ti, tr)));
    EXPECT_LT(base, qoe_single(cycle(a, ti + d, tr)));
    EXPECT_GT(base, qoe_single(cycle(a, ti, tr + d)));
  }
}

TEST(Urgency, Midpoint) {
  EXPECT_NEAR(urgency({1.0, 0.8}), 50.0, 1e-12);
  for (double a : {0.01, 0.2, 0.55, 0.9, 3.0}) EXPECT_NEAR(urgency({a, 0.8 * a}), 50.0, 1e-9);
}

TEST(Urgency, WorkedValuesAgainstOracle) {
  // Frozen from urgency_oracle.
  EXPECT_NEAR(urgency({1.0, 0.0}), 12.053879984188915, 1e-12);
  EXPECT_NEAR(urgency({1.0, 1.8}), 90.19067380477064, 1e-12);
  EXPECT_NEAR(static_cast<double>(urgency_oracle(0.0L)), 12.053879984188915, 1e-12);
  EXPECT_NEAR(static_cast<double>(urgency_oracle(1.8L)), 90.19067380477064, 1e-12);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ratio(-5.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double r = ratio(rng);
    EXPECT_NEAR(urgency({1.0, r}), static_cast<double>(urgency_oracle(r)), 1e-9);
  }
}

TEST(Urgency, DependsOnlyOnRatio) {
  EXPECT_NEAR(urgency({0.4, 0.2}), urgency({0.8, 0.4}), 1e-12);
  EXPECT_THROW(urgency({0.0, 0.1}), std::domain_error);
}

TEST(PenalizedQoe, SingleEndHasNoDispersion) {
  const std::vector<EndQoE> ends{{0, 70.0, 0.4}};
  const std::vector<double> ts{12.0}, tr{40.0};
  const auto r = penalized_average_qoe(ends, ts, tr, {1.0, 1.0});
  EXPECT_DOUBLE_EQ(r.sd_schedule, 0.0);
  EXPECT_DOUBLE_EQ(r.sd_retrain, 0.0);
  EXPECT_DOUBLE_EQ(r.q_t, 28.0);
}

TEST(PenalizedQoe, IdenticalEnds) {
  const std::vector<EndQoE> ends{{0, 50, 0.5}, {1, 50, 0.5}};
  const std::vector<double> ts{10, 10}, tr{20, 20};
  const auto r = penalized_average_qoe(ends, ts, tr, {1.0, 1.0});
  EXPECT_DOUBLE_EQ(r.q_avg, 25.0);
  EXPECT_DOUBLE_EQ(r.q_t, 25.0);
}

TEST(PenalizedQoe, WorkedDispersion) {
  const std::vector<EndQoE> ends{{0, 50, 0.4}, {1, 100, 0.6}};
  const std::vector<double> ts{0, 10}, tr{20, 40};
  const auto r = penalized_average_qoe(ends, ts, tr, {1.0, 1.0});
  EXPECT_NEAR(r.q_avg, 40.0, 1e-12);
  EXPECT_NEAR(r.sd_schedule, 5.0, 1e-12);
  EXPECT_NEAR(r.sd_retrain, 10.0, 1e-12);
  EXPECT_NEAR(r.q_t, 25.0, 1e-12);
}

TEST(PenalizedQoe, PermutationInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EndQoE> ends;
    std::vector<double> ts, tr;
    for (int i = 0; i < 6; ++i) {
      ends.push_back({i, 100 * u(rng), u(rng)});
      ts.push_back(50 * u(rng));
      tr.push_back(200 * u(rng));
    }
    const auto base = penalized_average_qoe(ends, ts, tr, {0.01, 0.02});
    std::vector<int> order{0, 1, 2, 3, 4, 5};
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<EndQoE> e2;
    std::vector<double> ts2, tr2;
    for (int i : order) {
      e2.push_back(ends[i]);
      ts2.push_back(ts[i]);
      tr2.push_back(tr[i]);
    }
    EXPECT_NEAR(penalized_average_qoe(e2, ts2, tr2, {0.01, 0.02}).q_t, base.q_t, 1e-9);
  }
}

TEST(PenalizedQoe, InputChecks) {
  const std::vector<EndQoE> none;
  const std::vector<double> empty;
  EXPECT_THROW(penalized_average_qoe(none, empty, empty, {}), std::domain_error);
  const std::vector<EndQoE> one{{0, 1, 1}};
  const std::vector<double> two{1, 2};
  EXPECT_THROW(penalized_average_qoe(one, two, two, {}), std::domain_error);
}

TEST(PenaltyWeights, InverseMeanCycle) {
  const std::vector<double> lengths{100, 300};
  const auto w = default_penalty_weights(lengths);
  EXPECT_DOUBLE_EQ(w.schedule, 1.0 / 200.0);
  EXPECT_DOUBLE_EQ(w.retrain, 1.0 / 200.0);
}

}  // namespace
