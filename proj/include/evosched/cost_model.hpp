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

/// @file cost_model.hpp
/// @brief Ground-truth retraining cost used by the simulator, and the
/// measurement sets the time regressor is trained on.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "evosched/regressor.hpp"
#include "evosched/rng.hpp"

namespace evosched::sim {

/// Compute-seconds of a retraining job at one full compute unit.
/// Multiplicative in the features, with a per-step overhead that makes
/// small batches slower.
inline double retrain_cost_seconds(const profiler::RetrainFeatures& f) {
  return 6.6e-4 * std::pow(f.param_mb, 0.85) * f.data_count * f.epochs *
         std::pow(f.unfrozen_layers, 0.35) * (1.0 + 6.0 / f.batch);
}

/// Noisy timing measurements of the cost model over diverse settings.
inline std::vector<profiler::TimeSample> sample_cost_dataset(std::size_t n, std::uint64_t seed,
                                                             double noise = 0.02) {
  auto rng = stream(seed, "cost-dataset");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, noise);
  auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, unit(rng)); };
  constexpr double kBatches[] = {1, 2, 4, 8, 16, 32};
  std::vector<profiler::TimeSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    profiler::RetrainFeatures f;
    f.param_mb = log_uniform(5.0, 400.0);
    f.data_count = std::round(log_uniform(5.0, 3000.0));
    f.unfrozen_layers = std::floor(1.0 + 60.0 * unit(rng));
    f.epochs = std::floor(1.0 + 30.0 * unit(rng));
    f.batch = kBatches[static_cast<std::size_t>(6.0 * unit(rng)) % 6];
    out.push_back({f, retrain_cost_seconds(f) * std::exp(jitter(rng))});
  }
  return out;
}

}  // namespace evosched::sim
