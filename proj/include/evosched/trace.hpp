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

/// @file trace.hpp
/// @brief Synthetic per-frame traces for a mobile end, and their CSV form.
///
/// Concepts are numbered by drift event: concept k is the scene after the
/// k-th event. A frame's position on the concept axis is continuous during
/// a ramp and jumps between neighbouring concepts for gradual drifts. The
/// deployed model is trained for one concept; its accuracy on a frame falls
/// by the accumulated drift magnitude between the two positions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evosched/drift.hpp"
#include "evosched/rng.hpp"
#include "evosched/sampler.hpp"
#include "evosched/scenario.hpp"

namespace evosched::sim {

using drift::FrameRecord;

/// Frame plus the noise-free quantities behind it.
struct SynthFrame {
  FrameRecord frame;
  double expected_accuracy = 0.0;
  /// Index of the most recent drift event's concept at this time.
  int concept_index = 0;
};

class TraceSynth {
 public:
  TraceSynth(const MobileEndSpec& spec, std::uint64_t seed)
      : spec_(spec),
        rng_(stream(seed, "trace", {static_cast<std::uint64_t>(spec.id)})),
        model_level_(spec.base_accuracy) {
    cumulative_.push_back(0.0);
    for (const auto& ev : spec_.drift_events) cumulative_.push_back(cumulative_.back() + ev.magnitude);

    auto crng = stream(seed, "centroids", {static_cast<std::uint64_t>(spec.id)});
    std::normal_distribution<double> unit(0.0, 1.0);
    for (int c = 0; c < spec_.categories; ++c) {
      auto& boxes = centroids_.centroids[c];
      for (int k = 0; k < spec_.boxes_per_category; ++k) {
        std::vector<double> z(static_cast<std::size_t>(spec_.feature_dim));
        for (auto& v : z) v = unit(crng);
        boxes.push_back(std::move(z));
      }
    }
    for (std::size_t j = 0; j <= spec_.drift_events.size(); ++j) {
      std::vector<double> dir(static_cast<std::size_t>(spec_.feature_dim), 0.0);
      if (j > 0) {
        auto orng = stream(seed, "concept", {static_cast<std::uint64_t>(spec.id), j});
        double norm = 0.0;
        for (auto& v : dir) {
          v = unit(orng);
          norm += v * v;
        }
        norm = std::sqrt(norm);
        for (auto& v : dir) v *= spec_.feature_shift * static_cast<double>(j) / norm;
      }
      offsets_.push_back(std::move(dir));
    }
  }

  /// The deployed model now serves the given concept at the given accuracy.
  void deploy(int concept_index, double level) {
    model_concept_ = concept_index;
    model_level_ = level;
  }

  [[nodiscard]] int model_concept() const noexcept { return model_concept_; }
  [[nodiscard]] double model_level() const noexcept { return model_level_; }

  /// Centroids the deployed model expects for its concept.
  [[nodiscard]] sampler::GlobalFeatureModel expected_features() const {
    return shifted_centroids(static_cast<double>(model_concept_));
  }

  /// Concept index of the latest event started at or before t.
  [[nodiscard]] int concept_at(double t) const {
    int k = 0;
    for (std::size_t i = 0; i < spec_.drift_events.size(); ++i) {
      if (spec_.drift_events[i].t <= t) k = static_cast<int>(i) + 1;
    }
    return k;
  }

  /// Expected model accuracy at a position on the concept axis.
  [[nodiscard]] double accuracy_at(double position) const {
    const double drop = std::abs(cumulative_at(position) - cumulative_at(model_concept_));
    return std::clamp(model_level_ - drop, 0.02, 1.0);
  }

  /// Synthesizes the next frame; frames are 1/frame_rate apart from t = 0.
  SynthFrame next() {
    const double t = static_cast<double>(frame_count_++) / spec_.frame_rate;
    const int k = concept_at(t);
    double position = k;
    double expected_position_acc = 0.0;
    if (k > 0) {
      const auto& ev = spec_.drift_events[static_cast<std::size_t>(k - 1)];
      const double length = spec_.transition_of(ev);
      const double progress = length > 0.0 ? std::clamp((t - ev.t) / length, 0.0, 1.0) : 1.0;
      if (ev.type == drift::DriftType::Gradual && progress < 1.0) {
        const double p_new =
            spec_.gradual_floor + (1.0 - spec_.gradual_floor) * std::pow(progress, spec_.gradual_exponent);
        const bool is_new = std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p_new;
        position = is_new ? k : k - 1;
        expected_position_acc = p_new * accuracy_at(k) + (1.0 - p_new) * accuracy_at(k - 1);
      } else {
        position = (k - 1) + progress;
        expected_position_acc = accuracy_at(position);
      }
    } else {
      expected_position_acc = accuracy_at(0.0);
    }

    SynthFrame out;
    out.concept_index = k;
    out.expected_accuracy = expected_position_acc;
    auto& f = out.frame;
    f.t = t;
    std::normal_distribution<double> noise(0.0, 1.0);
    // Confidence noise shrinks with the level; clc_noise is its spread at
    // base accuracy.
    const double level = accuracy_at(position);
    const double spread = spec_.clc_noise * level / spec_.base_accuracy;
    const double value = std::clamp(level + spread * noise(rng_), 0.001, 1.0);
    f.cc = std::sqrt(value);
    f.lc = value / f.cc;

    const bool redundant = spec_.redundant_fraction > 0.0 &&
                           std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < spec_.redundant_fraction;
    if (redundant) {
      f.pixel_diff = std::uniform_real_distribution<double>(0.0, 0.5)(rng_);
    } else {
      f.pixel_diff = std::max(1.0, pixel_level(position) + spec_.pixel_noise * noise(rng_));
    }

    const auto offset = offset_at(position);
    for (const auto& [category, boxes] : centroids_.centroids) {
      for (const auto& z : boxes) {
        drift::Detection det;
        det.category = category;
        det.confidence = f.cc;
        det.feature.resize(z.size());
        for (std::size_t d = 0; d < z.size(); ++d) {
          det.feature[d] = z[d] + offset[d] + spec_.feature_noise * noise(rng_);
        }
        f.detections.push_back(std::move(det));
      }
    }
    return out;
  }

 private:
  [[nodiscard]] double cumulative_at(double position) const {
    const double lo = std::floor(position);
    const auto j = static_cast<std::size_t>(std::clamp(lo, 0.0, static_cast<double>(cumulative_.size() - 1)));
    if (j + 1 >= cumulative_.size()) return cumulative_.back();
    return cumulative_[j] + (position - lo) * (cumulative_[j + 1] - cumulative_[j]);
  }

  [[nodiscard]] double pixel_level(double position) const {
    const auto& levels = spec_.pixel_levels;
    const auto level = [&](std::size_t j) { return levels[j % levels.size()]; };
    const double lo = std::floor(position);
    const auto j = static_cast<std::size_t>(std::max(0.0, lo));
    return level(j) + (position - lo) * (level(j + 1) - level(j));
  }

  [[nodiscard]] std::vector<double> offset_at(double position) const {
    const double lo = std::floor(position);
    const auto j = static_cast<std::size_t>(std::clamp(lo, 0.0, static_cast<double>(offsets_.size() - 1)));
    const std::size_t j2 = std::min(j + 1, offsets_.size() - 1);
    const double frac = position - lo;
    std::vector<double> out(offsets_[j].size());
    for (std::size_t d = 0; d < out.size(); ++d) out[d] = offsets_[j][d] + frac * (offsets_[j2][d] - offsets_[j][d]);
    return out;
  }

  [[nodiscard]] sampler::GlobalFeatureModel shifted_centroids(double position) const {
    const auto offset = offset_at(position);
    sampler::GlobalFeatureModel g = centroids_;
    for (auto& [category, boxes] : g.centroids) {
      for (auto& z : boxes) {
        for (std::size_t d = 0; d < z.size(); ++d) z[d] += offset[d];
      }
    }
    return g;
  }

  MobileEndSpec spec_;
  std::mt19937_64 rng_;
  std::vector<double> cumulative_;
  sampler::GlobalFeatureModel centroids_;
  std::vector<std::vector<double>> offsets_;
  int model_concept_ = 0;
  double model_level_ = 0.0;
  std::uint64_t frame_count_ = 0;
};

/// Trace of one end over [0, duration) with the initial model deployed
/// throughout.
inline std::vector<FrameRecord> gen_trace(const MobileEndSpec& spec, std::uint64_t seed, double duration) {
  TraceSynth synth(spec, seed);
  std::vector<FrameRecord> frames;
  const auto count = static_cast<std::size_t>(std::ceil(duration * spec.frame_rate - 1e-9));
  frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) frames.push_back(synth.next().frame);
  return frames;
}

// ---------------------------------------------------------------------------
// CSV form:
//   # evosched trace v1 feature_dim=D
//   t,cc,lc,pixel_diff,n_det,detections...
//   one row per frame; each detection adds category,confidence,z0..z{D-1}

class TraceFormatError : public std::invalid_argument {
 public:
  TraceFormatError(std::size_t line, const std::string& message)
      : std::invalid_argument("row " + std::to_string(line) + ": " + message), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline void write_trace_csv(std::ostream& os, const std::vector<FrameRecord>& frames, int feature_dim) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    os << buf;
  };
  os << "# evosched trace v1 feature_dim=" << feature_dim << '\n';
  os << "t,cc,lc,pixel_diff,n_det,detections\n";
  for (const auto& f : frames) {
    num(f.t);
    os << ',';
    num(f.cc);
    os << ',';
    num(f.lc);
    os << ',';
    num(f.pixel_diff);
    os << ',' << f.detections.size();
    for (const auto& d : f.detections) {
      if (static_cast<int>(d.feature.size()) != feature_dim) {
        throw std::invalid_argument("write_trace_csv: feature length differs from feature_dim");
      }
      os << ',' << d.category << ',';
      num(d.confidence);
      for (double z : d.feature) {
        os << ',';
        num(z);
      }
    }
    os << '\n';
  }
}

inline std::vector<FrameRecord> read_trace_csv(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  if (!next_line()) throw TraceFormatError(1, "empty trace");
  const std::string magic = "# evosched trace v1 feature_dim=";
  if (line.rfind(magic, 0) != 0) throw TraceFormatError(line_no, "missing '" + magic + "D' preamble");
  int dim = 0;
  try {
    std::size_t used = 0;
    dim = std::stoi(line.substr(magic.size()), &used);
    if (used != line.size() - magic.size() || dim < 0) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw TraceFormatError(line_no, "bad feature_dim");
  }
  if (!next_line() || line.rfind("t,cc,lc,pixel_diff,n_det", 0) != 0) {
    throw TraceFormatError(line_no, "missing header 't,cc,lc,pixel_diff,n_det,...'");
  }

  std::vector<FrameRecord> frames;
  std::vector<std::string> cells;
  while (next_line()) {
    cells.clear();
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    auto number = [&](std::size_t i, const char* what) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[i], &used);
        if (used != cells[i].size() || !std::isfinite(v)) throw std::invalid_argument("");
        return v;
      } catch (const std::exception&) {
        throw TraceFormatError(line_no, std::string("column ") + std::to_string(i + 1) + " (" + what +
                                            ") is not a finite number: '" + cells[i] + "'");
      }
    };
    if (cells.size() < 5) throw TraceFormatError(line_no, "expected at least 5 columns");
    FrameRecord f;
    f.t = number(0, "t");
    f.cc = number(1, "cc");
    f.lc = number(2, "lc");
    f.pixel_diff = number(3, "pixel_diff");
    const double n_det = number(4, "n_det");
    if (f.cc < 0.0 || f.cc > 1.0 || f.lc < 0.0 || f.lc > 1.0) {
      throw TraceFormatError(line_no, "cc and lc must lie in [0, 1]");
    }
    if (f.pixel_diff < 0.0) throw TraceFormatError(line_no, "pixel_diff must be non-negative");
    if (!frames.empty() && !(f.t > frames.back().t)) {
      throw TraceFormatError(line_no, "timestamps must be strictly increasing");
    }
    if (n_det < 0.0 || n_det != std::floor(n_det)) throw TraceFormatError(line_no, "n_det must be a count");
    const auto count = static_cast<std::size_t>(n_det);
    const std::size_t block = 2 + static_cast<std::size_t>(dim);
    if (cells.size() != 5 + count * block) {
      throw TraceFormatError(line_no, "expected " + std::to_string(5 + count * block) + " columns for " +
                                          std::to_string(count) + " detections, got " +
                                          std::to_string(cells.size()));
    }
    for (std::size_t d = 0; d < count; ++d) {
      const std::size_t base = 5 + d * block;
      drift::Detection det;
      const double cat = number(base, "category");
      if (cat != std::floor(cat)) throw TraceFormatError(line_no, "category must be an integer");
      det.category = static_cast<int>(cat);
      det.confidence = number(base + 1, "confidence");
      for (int k = 0; k < dim; ++k) det.feature.push_back(number(base + 2 + static_cast<std::size_t>(k), "feature"));
      f.detections.push_back(std::move(det));
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace evosched::sim
