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

/// @file drift.hpp
/// @brief Streaming drift detection over per-frame detection confidence.
///
/// A frozen reference window (win1) and a sliding window (win2) track the
/// mean detection confidence. Once the relative drop between them reaches
/// the trigger threshold the detector back-dates the onset of the drift
/// (t1), then slides a temporary window whose sub-window means are tested
/// for variance; the first placement with variance below the threshold
/// marks the end of the transition (t2, left border) and the evolution
/// trigger (t3, right border).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace evosched::drift {

struct Detection {
  int category = 0;
  double confidence = 0.0;
  std::vector<double> feature;
};

struct FrameRecord {
  double t = 0.0;
  double cc = 0.0;
  double lc = 0.0;
  /// Mean absolute per-pixel difference to the previous frame.
  double pixel_diff = 0.0;
  std::vector<Detection> detections;
};

/// Detection confidence: classification times localization confidence.
inline double clc(const FrameRecord& frame) noexcept { return frame.cc * frame.lc; }

/// Relative drop of the sliding-window confidence against the reference.
inline double rod(double clc1, double clc2) {
  if (clc1 == 0.0) {
    throw std::domain_error("rod: reference confidence is zero");
  }
  return (clc1 - clc2) / clc1;
}

enum class DriftType { Sudden, Incremental, Gradual };

inline std::string_view to_string(DriftType type) noexcept {
  switch (type) {
    case DriftType::Sudden: return "sudden";
    case DriftType::Incremental: return "incremental";
    case DriftType::Gradual: return "gradual";
  }
  return "unknown";
}

inline std::optional<DriftType> parse_drift_type(std::string_view s) noexcept {
  if (s == "sudden" || s == "Sudden") return DriftType::Sudden;
  if (s == "incremental" || s == "Incremental") return DriftType::Incremental;
  if (s == "gradual" || s == "Gradual") return DriftType::Gradual;
  return std::nullopt;
}

struct DetectorConfig {
  std::size_t window_frames = 90;
  std::size_t sub_windows = 3;
  std::size_t temp_window_frames = 90;
  double rod_threshold = 0.55;
  double variance_threshold = 0.045 * 0.045;
  double tau = 90.0;
  double d0_factor = 0.2;
  /// CUSUM allowance used to back-date the onset, as a fraction of the
  /// reference confidence.
  double onset_allowance = 0.03;

  void validate() const {
    if (window_frames == 0 || temp_window_frames == 0 || sub_windows < 2) {
      throw std::invalid_argument("detector: window sizes must be positive and sub_windows >= 2");
    }
    if (temp_window_frames % sub_windows != 0) {
      throw std::invalid_argument("detector: sub_windows must divide temp_window_frames");
    }
    if (!(rod_threshold > 0.0) || !(variance_threshold > 0.0) || !(tau > 0.0) ||
        !(d0_factor > 0.0) || !(onset_allowance > 0.0)) {
      throw std::invalid_argument("detector: thresholds must be positive");
    }
  }
};

struct DriftEvent {
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
  DriftType drift_type = DriftType::Sudden;
  double d = 0.0;
  double d0 = 0.0;
  /// Time at which the windowed drop first reached the trigger threshold.
  double trigger_t = 0.0;
  /// Reference (win1) and settled (win_temp) mean confidence.
  double clc_ref = 0.0;
  double clc_new = 0.0;
};

namespace detail {

inline double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace detail

/// Distance between two frame sets: absolute difference of their mean
/// pixel-difference statistic.
inline double distribution_distance(std::span<const FrameRecord> a,
                                    std::span<const FrameRecord> b) {
  if (a.empty() || b.empty()) {
    throw std::domain_error("distribution_distance: empty frame set");
  }
  auto mean_pd = [](std::span<const FrameRecord> xs) {
    double s = 0.0;
    for (const auto& f : xs) s += f.pixel_diff;
    return s / static_cast<double>(xs.size());
  };
  return std::abs(mean_pd(a) - mean_pd(b));
}

inline DriftType classify_drift(double t1, double t2, double d, double d0, double tau) {
  if (t2 - t1 < tau) return DriftType::Sudden;
  return d > d0 ? DriftType::Incremental : DriftType::Gradual;
}

/// One detector per mobile end. Not thread-safe; feed frames in time order.
class DriftDetector {
 public:
  explicit DriftDetector(DetectorConfig config = {}) : config_(config) { config_.validate(); }

  [[nodiscard]] const DetectorConfig& config() const noexcept { return config_; }

  /// Drops all history; the next frames form a fresh reference window.
  void reset() noexcept {
    t_.clear();
    clc_.clear();
    pd_.clear();
    prefix_.assign(1, 0.0);
    phase_ = Phase::Reference;
    clc_ref_ = 0.0;
    pd_ref_ = 0.0;
    trigger_ = 0;
    onset_ = 0;
    left_ = 0;
  }

  /// Feeds one frame. Returns an event when a drift has settled.
  std::optional<DriftEvent> update(const FrameRecord& frame) {
    if (!t_.empty() && !(frame.t > t_.back())) {
      throw std::invalid_argument("DriftDetector: frames must arrive in increasing time order");
    }
    const double value = clc(frame);
    t_.push_back(frame.t);
    clc_.push_back(value);
    pd_.push_back(frame.pixel_diff);
    prefix_.push_back(prefix_.back() + value);
    const std::size_t n = t_.size();
    const std::size_t w = config_.window_frames;

    switch (phase_) {
      case Phase::Reference:
        if (n == w) {
          clc_ref_ = range_mean(0, w);
          pd_ref_ = detail::mean_of(std::span(pd_).first(w));
          phase_ = Phase::Monitoring;
        }
        return std::nullopt;
      case Phase::Monitoring: {
        if (clc_ref_ <= 0.0) return std::nullopt;
        const double sliding = range_mean(n - w, n);
        if (rod(clc_ref_, sliding) >= config_.rod_threshold) {
          trigger_ = n - 1;
          onset_ = estimate_onset();
          left_ = trigger_;
          phase_ = Phase::Settling;
          return settle();
        }
        return std::nullopt;
      }
      case Phase::Settling:
        return settle();
    }
    return std::nullopt;
  }

 private:
  enum class Phase { Reference, Monitoring, Settling };

  [[nodiscard]] double range_mean(std::size_t begin, std::size_t end) const {
    return (prefix_[end] - prefix_[begin]) / static_cast<double>(end - begin);
  }

  // One-sided CUSUM on the drop below the baseline; its last zero before
  // the trigger is the raw onset. Slow ramps only cross the allowance late,
  // so when the early drop is ramp-like the onset is extrapolated back to
  // where the fitted line meets zero drop.
  [[nodiscard]] std::size_t estimate_onset() const {
    const std::size_t w = config_.window_frames;
    // Baseline: median of the reference window. The allowance grows by
    // three standard errors of that median so a short, noisy reference
    // does not read as a slow drop.
    std::vector<double> ref(clc_.begin(), clc_.begin() + static_cast<std::ptrdiff_t>(w));
    auto median = [](std::vector<double>& xs) {
      const auto m = xs.begin() + static_cast<std::ptrdiff_t>(xs.size() / 2);
      std::nth_element(xs.begin(), m, xs.end());
      return *m;
    };
    const double baseline = median(ref);
    for (auto& v : ref) v = std::abs(v - baseline);
    const double sd = 1.4826 * median(ref);
    const double kappa =
        config_.onset_allowance * baseline + 3.0 * 1.2533 * sd / std::sqrt(static_cast<double>(w));
    double cusum = 0.0;
    std::size_t last_zero = w - 1;
    for (std::size_t k = w; k <= trigger_; ++k) {
      cusum = std::max(0.0, cusum + (baseline - clc_[k]) - kappa);
      if (cusum == 0.0) last_zero = k;
    }
    const std::size_t raw = std::min(last_zero + 1, trigger_);
    double onset_t = t_[raw];

    const std::size_t mid = raw + (trigger_ - raw) / 2;
    if (mid > raw + 10) {
      const double n = static_cast<double>(mid - raw + 1);
      double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
      for (std::size_t k = raw; k <= mid; ++k) {
        const double x = t_[k] - t_[raw];
        const double y = baseline - clc_[k];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
      }
      const double denom = n * sxx - sx * sx;
      if (denom > 0.0) {
        const double slope = (n * sxy - sx * sy) / denom;
        const double intercept = (sy - slope * sx) / n;
        if (slope > 0.0 && intercept < 1.5 * kappa &&
            intercept / slope < 0.5 * (t_[trigger_] - t_[raw])) {
          onset_t = t_[raw] - intercept / slope;
        }
      }
    }
    onset_t = std::max(onset_t, t_.front());
    const auto it = std::lower_bound(t_.begin(), t_.end(), onset_t);
    return std::min(static_cast<std::size_t>(it - t_.begin()), trigger_);
  }

  [[nodiscard]] double sub_window_variance(std::size_t left) const {
    const std::size_t parts = config_.sub_windows;
    const std::size_t len = config_.temp_window_frames / parts;
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t j = 0; j < parts; ++j) {
      const double m = range_mean(left + j * len, left + (j + 1) * len);
      sum += m;
      sum_sq += m * m;
    }
    const double k = static_cast<double>(parts);
    const double mean = sum / k;
    return std::max(0.0, (sum_sq - k * mean * mean) / (k - 1.0));
  }

  std::optional<DriftEvent> settle() {
    const std::size_t span_len = config_.temp_window_frames;
    while (left_ + span_len <= t_.size()) {
      if (sub_window_variance(left_) < config_.variance_threshold) {
        DriftEvent ev = make_event(left_);
        reset();
        return ev;
      }
      ++left_;
    }
    return std::nullopt;
  }

  [[nodiscard]] DriftEvent make_event(std::size_t left) const {
    const std::size_t span_len = config_.temp_window_frames;
    const std::size_t right = left + span_len - 1;
    DriftEvent ev;
    ev.t1 = t_[onset_];
    ev.t2 = t_[left];
    const double dt = right > 0 ? t_[right] - t_[right - 1] : 0.0;
    ev.t3 = t_[right] + dt;
    ev.trigger_t = t_[trigger_];
    ev.clc_ref = clc_ref_;
    ev.clc_new = range_mean(left, right + 1);

    const std::size_t half_end = onset_ + (left - onset_) / 2;
    const double first_half = detail::mean_of(std::span(pd_).subspan(onset_, half_end - onset_ + 1));
    const double settled = detail::mean_of(std::span(pd_).subspan(left, span_len));
    ev.d = std::abs(first_half - pd_ref_);
    ev.d0 = config_.d0_factor * std::abs(settled - pd_ref_);
    ev.drift_type = classify_drift(ev.t1, ev.t2, ev.d, ev.d0, config_.tau);
    return ev;
  }

  DetectorConfig config_;
  std::vector<double> t_;
  std::vector<double> clc_;
  std::vector<double> pd_;
  std::vector<double> prefix_{0.0};
  Phase phase_ = Phase::Reference;
  double clc_ref_ = 0.0;
  double pd_ref_ = 0.0;
  std::size_t trigger_ = 0;
  std::size_t onset_ = 0;
  std::size_t left_ = 0;
};

}  // namespace evosched::drift
