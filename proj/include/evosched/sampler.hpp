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

/// @file sampler.hpp
/// @brief Drift-type specific selection of the frames uploaded for retraining.
///
/// All samplers take the time-ordered frames of the interval [t1, t3] and
/// return ascending indices into that span.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "evosched/drift.hpp"

namespace evosched::sampler {

using drift::Detection;
using drift::DriftType;
using drift::FrameRecord;

struct SamplerConfig {
  double r_f = 0.6;
  double r0 = 0.1;
  double delta_r = 0.05;
  double r_max = 1.0;
  double eps1 = 0.55;
  double eps2 = 0.2;
  int frame_w = 1280;
  int frame_h = 720;
  /// Length of one constant-rate segment of the linear schedule.
  double segment_seconds = 30.0;

  void validate() const {
    if (!(r_f > 0.0) || !(r0 > 0.0) || !(r0 <= r_max) || !(delta_r >= 0.0)) {
      throw std::invalid_argument("sampler: need r_f > 0, 0 < r0 <= r_max, delta_r >= 0");
    }
    if (!(eps1 > 0.0) || !(eps2 > 0.0) || frame_w <= 0 || frame_h <= 0 || !(segment_seconds > 0.0)) {
      throw std::invalid_argument("sampler: eps1, eps2, frame dims and segment length must be positive");
    }
  }
};

/// Per-category centroids of the features the deployed model expects.
struct GlobalFeatureModel {
  std::map<int, std::vector<std::vector<double>>> centroids;
};

namespace detail {

// Nominal frame interval of a time-ordered span; 0 for fewer than two frames.
inline double frame_interval(std::span<const FrameRecord> frames) {
  if (frames.size() < 2) return 0.0;
  return (frames.back().t - frames.front().t) / static_cast<double>(frames.size() - 1);
}

// Picks, for each target time, the first frame at or after it; duplicates
// collapse so a rate above the trace rate yields every frame.
inline void pick_targets(std::span<const FrameRecord> frames, double start, double end,
                         std::size_t count, std::vector<std::size_t>& out) {
  if (count == 0) return;
  const double step = (end - start) / static_cast<double>(count);
  const double slack = 1e-9 * std::max(1.0, std::abs(end));
  for (std::size_t j = 0; j < count; ++j) {
    const double target = start + step * static_cast<double>(j) - slack;
    auto it = std::lower_bound(frames.begin(), frames.end(), target,
                               [](const FrameRecord& f, double t) { return f.t < t; });
    if (it == frames.end()) break;
    const auto idx = static_cast<std::size_t>(it - frames.begin());
    if (it->t >= end - slack) break;
    if (out.empty() || idx > out.back()) out.push_back(idx);
  }
}

inline std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9));
}

}  // namespace detail

/// Fixed-rate selection, evenly spaced from the first frame.
inline std::vector<std::size_t> sample_sudden(std::span<const FrameRecord> frames, double r_f) {
  if (!(r_f > 0.0)) throw std::invalid_argument("sample_sudden: rate must be positive");
  std::vector<std::size_t> out;
  if (frames.empty()) return out;
  if (frames.size() == 1) return {0};
  const double start = frames.front().t;
  const double length = frames.back().t - start + detail::frame_interval(frames);
  const auto count = static_cast<std::size_t>(std::ceil(r_f * length - 1e-9));
  const double spacing = 1.0 / r_f;
  // Spacing is 1/r_f; the span passed to pick_targets covers count slots.
  detail::pick_targets(frames, start, start + spacing * static_cast<double>(count), count, out);
  return out;
}

/// Sampling rate that grows by delta_r every segment after the drift start.
inline double linear_rate(double t, double t1, const SamplerConfig& cfg) {
  const double steps = std::floor((t - t1) / cfg.segment_seconds);
  return std::min(cfg.r_max, cfg.r0 + std::max(0.0, steps) * cfg.delta_r);
}

/// Piecewise-constant rate per segment; segment k contributes
/// round(rate_k * segment length) evenly spaced frames.
inline std::vector<std::size_t> sample_incremental(std::span<const FrameRecord> frames,
                                                   const SamplerConfig& cfg) {
  std::vector<std::size_t> out;
  if (frames.empty()) return out;
  const double t1 = frames.front().t;
  const double end = frames.back().t + detail::frame_interval(frames);
  if (!(end > t1)) return {0};
  for (double seg = t1; seg < end - 1e-9; seg += cfg.segment_seconds) {
    const double seg_end = std::min(seg + cfg.segment_seconds, end);
    const double rate = linear_rate(seg, t1, cfg);
    const std::size_t count = detail::round_half_up(rate * (seg_end - seg));
    detail::pick_targets(frames, seg, seg_end, count, out);
  }
  return out;
}

/// Mean distance between a frame's boxes and the expected centroids,
/// averaged per category, then over the categories present.
inline double feature_deviation(const FrameRecord& frame, const GlobalFeatureModel& g) {
  std::map<int, std::vector<const Detection*>> by_category;
  for (const auto& det : frame.detections) by_category[det.category].push_back(&det);
  if (by_category.empty()) return 0.0;

  double total = 0.0;
  std::size_t categories = 0;
  for (const auto& [category, boxes] : by_category) {
    const auto found = g.centroids.find(category);
    if (found == g.centroids.end()) {
      throw std::invalid_argument("feature_deviation: unknown category " + std::to_string(category));
    }
    const auto& cents = found->second;
    struct Pair {
      double dist;
      std::size_t box;
      std::size_t cent;
    };
    std::vector<Pair> pairs;
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      for (std::size_t c = 0; c < cents.size(); ++c) {
        if (boxes[b]->feature.size() != cents[c].size()) {
          throw std::invalid_argument("feature_deviation: feature length mismatch in category " +
                                      std::to_string(category));
        }
        double sq = 0.0;
        for (std::size_t k = 0; k < cents[c].size(); ++k) {
          const double diff = boxes[b]->feature[k] - cents[c][k];
          sq += diff * diff;
        }
        pairs.push_back({std::sqrt(sq), b, c});
      }
    }
    // Ties broken by centroid then box index so the result does not depend
    // on the order of boxes within the frame.
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
      if (a.dist != b.dist) return a.dist < b.dist;
      return a.cent < b.cent;
    });
    std::vector<bool> box_used(boxes.size(), false), cent_used(cents.size(), false);
    double sum = 0.0;
    std::size_t matched = 0;
    for (const auto& p : pairs) {
      if (box_used[p.box] || cent_used[p.cent]) continue;
      box_used[p.box] = cent_used[p.cent] = true;
      sum += p.dist;
      ++matched;
    }
    if (matched == 0) continue;
    total += sum / static_cast<double>(matched);
    ++categories;
  }
  return categories == 0 ? 0.0 : total / static_cast<double>(categories);
}

/// Drops near-duplicate frames, then keeps frames whose features deviate
/// from the expected centroids.
inline std::vector<std::size_t> sample_gradual(std::span<const FrameRecord> frames,
                                               const SamplerConfig& cfg,
                                               const GlobalFeatureModel& g) {
  const double pixels = static_cast<double>(cfg.frame_w) * static_cast<double>(cfg.frame_h);
  const double redundancy_threshold = pixels * cfg.eps1;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    // pixel_diff is a per-pixel mean, so scale it to a frame total.
    if (frames[i].pixel_diff * pixels < redundancy_threshold) continue;
    if (feature_deviation(frames[i], g) > cfg.eps2) out.push_back(i);
  }
  return out;
}

inline std::vector<std::size_t> sample_for(DriftType type, std::span<const FrameRecord> frames,
                                           const SamplerConfig& cfg, const GlobalFeatureModel& g) {
  switch (type) {
    case DriftType::Sudden: return sample_sudden(frames, cfg.r_f);
    case DriftType::Incremental: return sample_incremental(frames, cfg);
    case DriftType::Gradual: return sample_gradual(frames, cfg, g);
  }
  return {};
}

/// Audit manifest: one `frame_index,timestamp` row per selected frame.
inline void write_manifest(std::ostream& os, std::span<const FrameRecord> frames,
                           std::span<const std::size_t> selected, std::size_t index_offset = 0) {
  os << "frame_index,timestamp\n";
  const auto old_precision = os.precision(17);
  for (std::size_t idx : selected) os << (idx + index_offset) << ',' << frames[idx].t << '\n';
  os.precision(old_precision);
}

}  // namespace evosched::sampler
