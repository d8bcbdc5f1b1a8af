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
#pragma once

// Independent reference computations shared by the unit and acceptance
// suites. Nothing here calls into the code under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "evosched/profiler.hpp"
#include "evosched/scheduler.hpp"

namespace evosched::testing {

struct MemoryOracle {
  double params = 0;
  double features = 0;
  double total = 0;
};

// Per-layer hand summation: weights, then activations with the usual
// floor((w - k + 2p) / s) + 1 output size.
inline MemoryOracle memory_oracle(const profiler::ModelArch& arch) {
  const double b = arch.bitwidth / 8.0;
  std::int64_t w = arch.input_w, h = arch.input_h, c = 3;
  MemoryOracle m;
  for (const auto& l : arch.layers) {
    switch (l.kind) {
      case profiler::LayerKind::Conv:
        m.params += double(l.c_in) * double(l.c_out) * double(l.k1) * double(l.k2) * b;
        w = (w - l.k1 + 2 * l.p1) / l.s1 + 1;
        h = (h - l.k2 + 2 * l.p2) / l.s2 + 1;
        c = l.c_out;
        break;
      case profiler::LayerKind::FullyConnected:
        m.params += double(l.c_in) * double(l.c_out) * b;
        w = h = 1;
        c = l.c_out;
        break;
      case profiler::LayerKind::BatchNorm:
        m.params += 2.0 * double(l.c_out) * b;
        break;
    }
    m.features += double(w) * double(h) * double(c) * b * double(arch.batch);
  }
  // params + optimizer state (2x params) + activations + their gradients + workspace
  m.total = 3.0 * m.params + 2.0 * m.features + arch.workspace_mb * 1048576.0;
  return m;
}

inline profiler::LayerSpec conv(std::int64_t cin, std::int64_t cout, std::int64_t k, std::int64_t s,
                                std::int64_t p, const char* name = "") {
  return {profiler::LayerKind::Conv, name, cin, cout, k, k, s, s, p, p};
}
inline profiler::LayerSpec bn(std::int64_t c) { return {profiler::LayerKind::BatchNorm, "", c, c}; }
inline profiler::LayerSpec fc(std::int64_t cin, std::int64_t cout) {
  return {profiler::LayerKind::FullyConnected, "", cin, cout};
}

/// Three reference architectures: a one-block stem, a small VGG-style
/// stack at 16-bit, and a strided net with rectangular input and batch 8.
inline std::vector<profiler::ModelArch> reference_archs() {
  std::vector<profiler::ModelArch> out;
  profiler::ModelArch stem;
  stem.layers = {conv(3, 64, 7, 2, 3), bn(64), fc(112 * 112 * 64, 10)};
  out.push_back(stem);

  profiler::ModelArch vgg;
  vgg.bitwidth = 16;
  vgg.input_w = vgg.input_h = 64;
  vgg.batch = 4;
  vgg.layers = {conv(3, 32, 3, 1, 1),   conv(32, 32, 3, 1, 1), conv(32, 64, 3, 2, 1),
                conv(64, 64, 3, 1, 1),  conv(64, 128, 3, 2, 1), bn(128),
                fc(16 * 16 * 128, 256), fc(256, 100)};
  out.push_back(vgg);

  profiler::ModelArch rect;
  rect.input_w = 320;
  rect.input_h = 192;
  rect.batch = 8;
  rect.workspace_mb = 256.0;
  rect.layers = {conv(3, 16, 5, 2, 2), bn(16), conv(16, 32, 3, 2, 0), bn(32), conv(32, 64, 1, 1, 0),
                 fc(79 * 47 * 64, 2)};
  out.push_back(rect);
  return out;
}

/// Best knapsack value by enumerating every subset, with the same 1 MB
/// ceiling discretization of demands and floor of the capacity. Returns
/// the lexicographically smallest optimal id set.
inline std::pair<double, std::vector<int>> knapsack_oracle(const std::vector<scheduler::EvolutionTask>& tasks,
                                                           double capacity, double value_scale = 100.0) {
  const auto cap = static_cast<std::int64_t>(std::floor(capacity + 1e-9));
  const std::size_t n = tasks.size();
  double best = 0.0;
  std::vector<int> best_ids;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::int64_t used = 0;
    double value = 0.0;
    std::vector<int> ids;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        used += static_cast<std::int64_t>(std::ceil(tasks[i].mem_demand - 1e-9));
        value += value_scale / tasks[i].predicted_t_r;
        ids.push_back(tasks[i].id);
      }
    }
    if (used > cap) continue;
    std::sort(ids.begin(), ids.end());
    const double tol = 1e-9 * std::max(1.0, std::abs(best));
    if (value > best + tol || (std::abs(value - best) <= tol && ids < best_ids)) {
      best = value;
      best_ids = ids;
    }
  }
  return {best, best_ids};
}

/// Upper-tail probability of Normal(mu, sigma^2) beyond x, by composite
/// Simpson integration of the density over [x, x + 14 sigma].
inline double normal_upper_tail(double x, double mu, double sigma) {
  const int n = 20000;
  const double a = x, b = x + 14.0 * sigma, h = (b - a) / n;
  auto pdf = [&](double v) {
    const double z = (v - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * 3.14159265358979323846));
  };
  double s = pdf(a) + pdf(b);
  for (int i = 1; i < n; ++i) s += pdf(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// Group count from the quadrature tail mass: shortest tail (to 1e-7) that
/// holds n_min of n_max requests, then K = 1 / tail mass, rounded.
inline int group_number_oracle(const scheduler::GroupingConfig& cfg) {
  const double mu = 0.5 * (cfg.lambda_min + cfg.lambda_max);
  const double half = 0.5 * (cfg.lambda_max - cfg.lambda_min);
  auto count = [&](double beta) { return cfg.n_max * normal_upper_tail(mu + half - beta, mu, cfg.sigma); };
  if (count(cfg.eps_range) < cfg.n_min) return -1;
  double lo = 0.0, hi = cfg.eps_range;
  if (count(0.0) >= cfg.n_min) hi = 0.0;
  while (hi - lo > 1e-7) {
    const double mid = 0.5 * (lo + hi);
    (count(mid) >= cfg.n_min ? hi : lo) = mid;
  }
  return std::max(1, static_cast<int>(std::lround(1.0 / normal_upper_tail(mu + half - hi, mu, cfg.sigma))));
}

/// Smallest sigma on the 0.01 grid over [10, 25] for which the default
/// grouping settings (N 12, n_min 3, eps 35, range [0, 100]) give K = 4.
inline double calibrate_sigma() {
  for (int i = 1000; i <= 2500; ++i) {
    scheduler::GroupingConfig cfg;
    cfg.sigma = i / 100.0;
    try {
      if (scheduler::group_number(cfg) == 4) return cfg.sigma;
    } catch (const std::domain_error&) {
    }
  }
  return std::nan("");
}

/// Frozen result of calibrate_sigma().
inline constexpr double kCalibratedSigma = 22.24;

}  // namespace evosched::testing
