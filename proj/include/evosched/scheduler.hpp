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

/// @file scheduler.hpp
/// @brief Urgency grouping, knapsack task selection under a predicted
/// memory capacity, and memory-proportional compute allocation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace evosched::scheduler {

struct EvolutionTask {
  int id = 0;
  int end_id = 0;
  double arrival_t = 0.0;
  double urgency = 0.0;
  double mem_demand = 0.0;  ///< MB
  double predicted_t_r = 0.0;
  double work = 0.0;
  int group = 1;
};

struct GroupingConfig {
  int n_max = 12;
  int n_min = 3;
  double eps_range = 35.0;
  double sigma = 100.0 / 6.0;
  double lambda_min = 0.0;
  double lambda_max = 100.0;

  void validate() const {
    if (n_max < 1 || n_min < 1) throw std::invalid_argument("grouping: n_max and n_min must be >= 1");
    if (!(lambda_min < lambda_max)) throw std::invalid_argument("grouping: lambda_min must be < lambda_max");
    if (!(sigma > 0.0) || !(eps_range >= 0.0)) {
      throw std::invalid_argument("grouping: sigma must be positive and eps_range non-negative");
    }
  }
};

struct SelectionResult {
  std::vector<int> selected;  ///< ascending ids
  double total_value = 0.0;
  double capacity_used = 0.0;  ///< MB, exact demands
  double decision_t = 0.0;
};

struct RunningTask {
  double mem = 0.0;  ///< MB
  double compute_share = 0.0;
  double predicted_completion = 0.0;
  double retrain_time = 0.0;  ///< predicted retraining seconds of this task
};

struct GpuPool {
  double mem_capacity = 0.0;  ///< MB
  double compute_capacity = 1.0;
  std::map<int, RunningTask> running;

  [[nodiscard]] double allocated_memory() const noexcept {
    double s = 0.0;
    for (const auto& [id, t] : running) s += t.mem;
    return s;
  }

  /// Memory free at time t, counting only tasks still running then.
  [[nodiscard]] double free_memory_at(double t) const noexcept {
    double used = 0.0;
    for (const auto& [id, task] : running) {
      if (task.predicted_completion > t) used += task.mem;
    }
    return mem_capacity - used;
  }
};

namespace detail {

inline double tail_mass_groups(const GroupingConfig& cfg, double beta) {
  const double half = (cfg.lambda_max - cfg.lambda_min) / 2.0;
  return 2.0 / (1.0 - std::erf((half - beta) / (std::numbers::sqrt2 * cfg.sigma)));
}

// Expected requests falling in a tail of length beta out of n_max.
inline double tail_count(const GroupingConfig& cfg, double beta) {
  return cfg.n_max / tail_mass_groups(cfg, beta);
}

}  // namespace detail

/// Group count implied by a tail range of length beta.
inline int group_number_for_tail(const GroupingConfig& cfg, double beta) {
  cfg.validate();
  const double k = detail::tail_mass_groups(cfg, beta);
  if (!std::isfinite(k)) throw std::domain_error("group_number: tail mass vanishes");
  return std::max(1, static_cast<int>(std::lround(k)));
}

/// Shortest tail length in [0, eps_range] whose expected request count
/// reaches n_min, located by bisection.
inline double tail_length(const GroupingConfig& cfg) {
  cfg.validate();
  const double need = cfg.n_min;
  if (detail::tail_count(cfg, cfg.eps_range) < need) {
    throw std::domain_error("group_number: no tail length within eps_range holds n_min requests");
  }
  if (detail::tail_count(cfg, 0.0) >= need) return 0.0;
  double lo = 0.0, hi = cfg.eps_range;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (detail::tail_count(cfg, mid) >= need ? hi : lo) = mid;
  }
  return hi;
}

inline int group_number(const GroupingConfig& cfg) {
  return group_number_for_tail(cfg, tail_length(cfg));
}

/// Standard normal quantile by bisection on the complementary error function.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must be in (0, 1)");
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (0.5 * std::erfc(-mid / std::numbers::sqrt2) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Equal-probability cut points: the j/K quantiles of the urgency normal.
inline std::vector<double> group_boundaries(int k, double lambda_min, double lambda_max,
                                            double sigma) {
  if (k < 1) throw std::invalid_argument("group_boundaries: K must be >= 1");
  if (!(sigma > 0.0) || !(lambda_min < lambda_max)) {
    throw std::invalid_argument("group_boundaries: need sigma > 0 and lambda_min < lambda_max");
  }
  const double mu = 0.5 * (lambda_min + lambda_max);
  std::vector<double> cuts;
  for (int j = 1; j < k; ++j) {
    const double q = mu + sigma * normal_quantile(static_cast<double>(j) / k);
    cuts.push_back(std::clamp(q, lambda_min, lambda_max));
  }
  return cuts;
}

/// Group index, 1 being the most urgent band. An urgency equal to a cut
/// point belongs to the less urgent band.
inline int assign_group(double urgency, std::span<const double> boundaries) {
  const auto above = std::count_if(boundaries.begin(), boundaries.end(),
                                   [urgency](double b) { return b < urgency; });
  return static_cast<int>(boundaries.size() - static_cast<std::size_t>(above)) + 1;
}

/// Moves every pending task up one group until group 1 is occupied.
/// Returns the number of promotion rounds applied.
inline int promote_groups(std::span<EvolutionTask> pending) {
  if (pending.empty()) return 0;
  int lowest = std::numeric_limits<int>::max();
  for (const auto& t : pending) lowest = std::min(lowest, t.group);
  const int rounds = std::max(0, lowest - 1);
  for (auto& t : pending) t.group -= rounds;
  return rounds;
}

struct CapacityDecision {
  double capacity = 0.0;  ///< MB
  double decision_t = 0.0;
};

/// Memory available for the next admission round. When another running
/// task is predicted to finish within lookahead_factor * ref_retrain_time,
/// the decision is deferred to the latest such completion.
inline CapacityDecision decide_capacity(const GpuPool& pool, double now, double ref_retrain_time,
                                        double lookahead_factor) {
  const double horizon = now + lookahead_factor * std::max(0.0, ref_retrain_time);
  double at = now;
  for (const auto& [id, task] : pool.running) {
    if (task.predicted_completion > now && task.predicted_completion <= horizon) {
      at = std::max(at, task.predicted_completion);
    }
  }
  return {pool.free_memory_at(at), at};
}

/// 0/1 knapsack over memory in 1 MB units, maximizing the summed
/// value_scale / predicted_t_r. Among equal-value optima the
/// lexicographically smallest id set wins.
inline SelectionResult select_tasks(std::span<const EvolutionTask> candidates, double capacity,
                                    double value_scale = 100.0, double decision_t = 0.0) {
  SelectionResult result;
  result.decision_t = decision_t;
  if (!(capacity > 0.0) || candidates.empty()) return result;
  if (!(value_scale > 0.0)) throw std::invalid_argument("select_tasks: value_scale must be positive");

  std::vector<const EvolutionTask*> items;
  for (const auto& c : candidates) {
    if (!(c.mem_demand > 0.0) || !(c.predicted_t_r > 0.0)) {
      throw std::invalid_argument("select_tasks: task " + std::to_string(c.id) +
                                  " needs positive memory and retraining time");
    }
    items.push_back(&c);
  }
  std::sort(items.begin(), items.end(), [](auto* a, auto* b) { return a->id < b->id; });

  const auto cap = static_cast<std::size_t>(std::floor(capacity + 1e-9));
  const std::size_t n = items.size();
  std::vector<std::size_t> weight(n);
  std::vector<double> value(n);
  for (std::size_t i = 0; i < n; ++i) {
    weight[i] = static_cast<std::size_t>(std::ceil(items[i]->mem_demand - 1e-9));
    value[i] = value_scale / items[i]->predicted_t_r;
  }
  // best[i][c]: optimum over items i..n-1 with capacity c.
  std::vector<std::vector<double>> best(n + 1, std::vector<double>(cap + 1, 0.0));
  for (std::size_t i = n; i-- > 0;) {
    const auto& next = best[i + 1];
    auto& cur = best[i];
    for (std::size_t c = 0; c <= cap; ++c) {
      cur[c] = next[c];
      if (weight[i] <= c) cur[c] = std::max(cur[c], value[i] + next[c - weight[i]]);
    }
  }
  // Walk forward taking each item whenever that stays optimal.
  std::size_t c = cap;
  for (std::size_t i = 0; i < n; ++i) {
    if (weight[i] > c) continue;
    const double take = value[i] + best[i + 1][c - weight[i]];
    const double tol = 1e-9 * std::max(1.0, std::abs(best[i][c]));
    if (take >= best[i][c] - tol) {
      result.selected.push_back(items[i]->id);
      result.total_value += value[i];
      result.capacity_used += items[i]->mem_demand;
      c -= weight[i];
    }
  }
  return result;
}

/// Compute shares proportional to memory demand, summing to the capacity.
inline std::map<int, double> allocate_compute(std::span<const EvolutionTask> selected,
                                              double compute_available) {
  std::map<int, double> shares;
  if (selected.empty()) return shares;
  double total = 0.0;
  for (const auto& t : selected) total += t.mem_demand;
  if (!(total > 0.0)) throw std::invalid_argument("allocate_compute: demands must be positive");
  for (const auto& t : selected) shares[t.id] = t.mem_demand / total * compute_available;
  return shares;
}

}  // namespace evosched::scheduler
