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

/// @file core.hpp
/// @brief Life-cycle QoE, model-evolving urgency and the penalized fleet objective.

#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace evosched::core {

/// One model life cycle: a high-accuracy service period followed by the
/// evolution round trip (upload, queueing, retraining, download).
struct LifeCycle {
  double t_infer = 0.0;
  double t_upload = 0.0;
  double t_schedule = 0.0;
  double t_retrain = 0.0;
  double t_download = 0.0;
  /// Time-weighted mean accuracy over the whole cycle.
  double avg_accuracy = 0.0;

  /// Total evolution time; always the exact sum of the four phases.
  [[nodiscard]] double evolving_time() const noexcept {
    return t_upload + t_schedule + t_retrain + t_download;
  }
  [[nodiscard]] double length() const noexcept { return t_infer + evolving_time(); }

  bool operator==(const LifeCycle&) const = default;
};

struct UrgencyInput {
  double current_accuracy = 1.0;
  double accuracy_drop = 0.0;
};

struct EndQoE {
  int end_id = 0;
  double urgency = 0.0;
  double qoe = 0.0;
};

/// Weights applied to the dispersion penalties of the fleet objective.
struct PenaltyWeights {
  double schedule = 1.0;
  double retrain = 1.0;
};

struct QoEReport {
  std::vector<EndQoE> per_end_qoe;
  double q_avg = 0.0;
  double sd_schedule = 0.0;
  double sd_retrain = 0.0;
  double q_t = 0.0;
  PenaltyWeights penalty_weights;
};

/// Fraction of the life cycle spent in high-quality service, scaled by
/// the cycle's mean accuracy.
inline double qoe_single(const LifeCycle& cycle) {
  const double total = cycle.length();
  if (!(total > 0.0)) {
    throw std::domain_error("qoe_single: life cycle has zero length");
  }
  if (cycle.t_infer < 0.0 || cycle.t_upload < 0.0 || cycle.t_schedule < 0.0 ||
      cycle.t_retrain < 0.0 || cycle.t_download < 0.0) {
    throw std::domain_error("qoe_single: negative duration");
  }
  return cycle.avg_accuracy * cycle.t_infer / total;
}

/// Urgency score in (0, 100); 50 exactly when the relative drop is 0.8.
inline double urgency(const UrgencyInput& u) {
  if (!(u.current_accuracy > 0.0)) {
    throw std::domain_error("urgency: current accuracy must be positive");
  }
  const double ratio = u.accuracy_drop / u.current_accuracy;
  constexpr double pi = std::numbers::pi;
  return (100.0 / pi) * (std::atan(pi * (ratio - 0.8)) + pi / 2.0);
}

/// Population standard deviation.
inline double population_sd(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / n);
}

/// Default penalty weights: 1 / mean life-cycle length, which turns the
/// dispersion terms into fractions of a typical cycle.
inline PenaltyWeights default_penalty_weights(std::span<const double> cycle_lengths) {
  if (cycle_lengths.empty()) return {};
  const double mean = std::accumulate(cycle_lengths.begin(), cycle_lengths.end(), 0.0) /
                      static_cast<double>(cycle_lengths.size());
  if (!(mean > 0.0)) return {};
  return {1.0 / mean, 1.0 / mean};
}

/// Urgency-weighted average QoE minus weighted dispersion of the scheduling
/// and retraining times.
inline QoEReport penalized_average_qoe(std::span<const EndQoE> ends,
                                       std::span<const double> schedule_times,
                                       std::span<const double> retrain_times,
                                       PenaltyWeights weights) {
  if (ends.empty()) {
    throw std::domain_error("penalized_average_qoe: no ends");
  }
  if (schedule_times.size() != ends.size() || retrain_times.size() != ends.size()) {
    throw std::domain_error("penalized_average_qoe: input lengths differ");
  }
  QoEReport report;
  report.per_end_qoe.assign(ends.begin(), ends.end());
  double sum = 0.0;
  for (const auto& e : ends) sum += e.urgency * e.qoe;
  report.q_avg = sum / static_cast<double>(ends.size());
  report.sd_schedule = population_sd(schedule_times);
  report.sd_retrain = population_sd(retrain_times);
  report.penalty_weights = weights;
  report.q_t = report.q_avg - weights.schedule * report.sd_schedule -
               weights.retrain * report.sd_retrain;
  return report;
}

}  // namespace evosched::core
