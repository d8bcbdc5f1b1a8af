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

/// @file profiler.hpp
/// @brief Pre-scheduling estimates of a retraining task: analytic memory
/// demand and a fitted accuracy-versus-epoch curve.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace evosched::profiler {

/// Bytes per MB used for all memory figures.
inline constexpr double kBytesPerMB = 1024.0 * 1024.0;
inline constexpr double kDefaultWorkspaceMB = 847.30;

enum class LayerKind { Conv, FullyConnected, BatchNorm };

inline std::string_view to_string(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::Conv: return "conv";
    case LayerKind::FullyConnected: return "fc";
    case LayerKind::BatchNorm: return "bn";
  }
  return "unknown";
}

struct LayerSpec {
  LayerKind kind = LayerKind::Conv;
  std::string name;
  std::int64_t c_in = 0;
  std::int64_t c_out = 0;
  std::int64_t k1 = 1;
  std::int64_t k2 = 1;
  std::int64_t s1 = 1;
  std::int64_t s2 = 1;
  std::int64_t p1 = 0;
  std::int64_t p2 = 0;
};

struct ModelArch {
  std::vector<LayerSpec> layers;
  int bitwidth = 32;
  std::int64_t input_w = 224;
  std::int64_t input_h = 224;
  std::int64_t batch = 1;
  double workspace_mb = kDefaultWorkspaceMB;
};

struct FeatureDims {
  std::int64_t w = 0;
  std::int64_t h = 0;
  std::int64_t c = 0;
  bool operator==(const FeatureDims&) const = default;
};

struct FeatureMemory {
  double bytes = 0.0;
  FeatureDims out;
};

struct MemoryBreakdown {
  double m_p = 0.0;
  double m_f = 0.0;
  double m_g = 0.0;
  double m_opt = 0.0;
  double m_ws = 0.0;
  double total = 0.0;

  [[nodiscard]] double total_mb() const noexcept { return total / kBytesPerMB; }
};

namespace detail {

inline double bytes_per_value(int bitwidth) {
  if (bitwidth != 8 && bitwidth != 16 && bitwidth != 32) {
    throw std::invalid_argument("bitwidth must be 8, 16 or 32, got " + std::to_string(bitwidth));
  }
  return bitwidth / 8.0;
}

inline std::string layer_label(const LayerSpec& layer, std::size_t index) {
  std::string label = "layer " + std::to_string(index);
  if (!layer.name.empty()) label += " (" + layer.name + ")";
  return label;
}

}  // namespace detail

inline double conv_param_memory(const LayerSpec& layer, int bitwidth) {
  if (layer.kind != LayerKind::Conv) {
    throw std::invalid_argument("conv_param_memory: layer is not a convolution");
  }
  return static_cast<double>(layer.c_in * layer.c_out * layer.k1 * layer.k2) *
         detail::bytes_per_value(bitwidth);
}

/// Parameter bytes of any supported layer. Batch norm holds a scale and a
/// shift per output channel.
inline double param_memory(const LayerSpec& layer, int bitwidth) {
  const double bytes = detail::bytes_per_value(bitwidth);
  switch (layer.kind) {
    case LayerKind::Conv: return conv_param_memory(layer, bitwidth);
    case LayerKind::FullyConnected: return static_cast<double>(layer.c_in * layer.c_out) * bytes;
    case LayerKind::BatchNorm: return 2.0 * static_cast<double>(layer.c_out) * bytes;
  }
  return 0.0;
}

/// Output activation bytes of one layer and the dims it hands to the next.
inline FeatureMemory feature_memory(const LayerSpec& layer, FeatureDims in, int bitwidth,
                                    std::int64_t batch) {
  const double bytes = detail::bytes_per_value(bitwidth);
  if (in.w <= 0 || in.h <= 0 || in.c <= 0 || batch <= 0) {
    throw std::invalid_argument("feature_memory: input dims and batch must be positive");
  }
  if (layer.c_out <= 0) throw std::invalid_argument("feature_memory: c_out must be positive");
  FeatureDims out;
  switch (layer.kind) {
    case LayerKind::Conv: {
      if (layer.c_in != in.c) {
        throw std::invalid_argument("feature_memory: c_in " + std::to_string(layer.c_in) +
                                    " does not match incoming channels " + std::to_string(in.c));
      }
      if (layer.k1 <= 0 || layer.k2 <= 0 || layer.s1 <= 0 || layer.s2 <= 0 || layer.p1 < 0 ||
          layer.p2 < 0) {
        throw std::invalid_argument("feature_memory: invalid kernel, stride or padding");
      }
      const std::int64_t nw = in.w - layer.k1 + 2 * layer.p1;
      const std::int64_t nh = in.h - layer.k2 + 2 * layer.p2;
      if (nw < 0 || nh < 0) {
        throw std::invalid_argument("feature_memory: kernel larger than padded input");
      }
      out = {nw / layer.s1 + 1, nh / layer.s2 + 1, layer.c_out};
      break;
    }
    case LayerKind::FullyConnected:
      if (layer.c_in != in.w * in.h * in.c) {
        throw std::invalid_argument("feature_memory: fc c_in " + std::to_string(layer.c_in) +
                                    " does not match flattened input " +
                                    std::to_string(in.w * in.h * in.c));
      }
      out = {1, 1, layer.c_out};
      break;
    case LayerKind::BatchNorm:
      if (layer.c_out != in.c || (layer.c_in != 0 && layer.c_in != in.c)) {
        throw std::invalid_argument("feature_memory: batch norm channels do not match input");
      }
      out = in;
      break;
  }
  return {static_cast<double>(out.w * out.h * out.c) * bytes * static_cast<double>(batch), out};
}

/// Sums per-layer parameter and activation memory. Gradients mirror the
/// activations, the optimizer keeps two moments per parameter, and the
/// workspace is a fixed allowance.
inline MemoryBreakdown memory_demand(const ModelArch& arch) {
  detail::bytes_per_value(arch.bitwidth);
  if (arch.input_w <= 0 || arch.input_h <= 0 || arch.batch <= 0 || !(arch.workspace_mb >= 0.0)) {
    throw std::invalid_argument("memory_demand: input dims and batch must be positive");
  }
  MemoryBreakdown mb;
  FeatureDims dims{arch.input_w, arch.input_h, arch.layers.empty() ? 0 : arch.layers.front().c_in};
  if (!arch.layers.empty() && arch.layers.front().kind == LayerKind::BatchNorm) {
    dims.c = arch.layers.front().c_out;
  }
  for (std::size_t i = 0; i < arch.layers.size(); ++i) {
    const auto& layer = arch.layers[i];
    try {
      mb.m_p += param_memory(layer, arch.bitwidth);
      const auto fm = feature_memory(layer, dims, arch.bitwidth, arch.batch);
      mb.m_f += fm.bytes;
      dims = fm.out;
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(detail::layer_label(layer, i) + ": " + e.what());
    }
  }
  mb.m_g = mb.m_f;
  mb.m_opt = 2.0 * mb.m_p;
  mb.m_ws = arch.workspace_mb * kBytesPerMB;
  mb.total = mb.m_p + mb.m_f + mb.m_g + mb.m_opt + mb.m_ws;
  return mb;
}

/// Parameter bytes of the whole architecture.
inline double param_bytes(const ModelArch& arch) {
  double total = 0.0;
  for (const auto& layer : arch.layers) total += param_memory(layer, arch.bitwidth);
  return total;
}

/// Saturating accuracy curve A(e) = a_max - 1 / (b e + c).
struct AccuracyCurve {
  double a_max = 0.0;
  double b = 0.0;
  double c = 0.0;

  [[nodiscard]] double raw(double epoch) const noexcept {
    const double denom = b * epoch + c;
    if (!(denom > 0.0)) return -std::numeric_limits<double>::infinity();
    return a_max - 1.0 / denom;
  }
  [[nodiscard]] double operator()(double epoch) const noexcept {
    return std::clamp(raw(epoch), 0.0, 1.0);
  }
};

struct AccuracyProbe {
  double epoch = 0.0;
  double accuracy = 0.0;
};

struct CurveFit {
  AccuracyCurve curve;
  double residual = 0.0;
  int iterations = 0;
};

namespace detail {

// With r = c/b and k = 1/b the model is y = a - k / (e + r), linear in (a, k)
// for fixed r. Solves that least squares problem with k >= 0.
struct InnerFit {
  double a = 0.0;
  double k = 0.0;
  double sse = 0.0;
};

inline InnerFit fit_given_offset(std::span<const AccuracyProbe> probes, double r) {
  const double n = static_cast<double>(probes.size());
  double su = 0.0, sy = 0.0;
  for (const auto& p : probes) {
    su += 1.0 / (p.epoch + r);
    sy += p.accuracy;
  }
  const double mu = su / n, my = sy / n;
  double suu = 0.0, suy = 0.0;
  for (const auto& p : probes) {
    const double du = 1.0 / (p.epoch + r) - mu;
    suu += du * du;
    suy += du * (p.accuracy - my);
  }
  InnerFit fit;
  fit.k = suu > 0.0 ? std::max(0.0, -suy / suu) : 0.0;
  fit.a = my + fit.k * mu;
  for (const auto& p : probes) {
    const double e = p.accuracy - (fit.a - fit.k / (p.epoch + r));
    fit.sse += e * e;
  }
  return fit;
}

}  // namespace detail

/// Least-squares fit of the saturating curve to probe measurements.
/// Searches the offset r = c/b over a log grid, refines it by golden
/// section until the log-offset bracket is narrower than `tolerance`,
/// and solves the remaining parameters in closed form.
inline CurveFit fit_accuracy_curve(std::span<const AccuracyProbe> probes,
                                   int max_iterations = 200, double tolerance = 1e-6) {
  if (probes.size() < 3) throw std::invalid_argument("fit_accuracy_curve: need at least 3 probes");
  double e_min = probes.front().epoch, e_max = e_min;
  for (const auto& p : probes) {
    if (!std::isfinite(p.epoch) || !std::isfinite(p.accuracy) || p.epoch < 0.0) {
      throw std::invalid_argument("fit_accuracy_curve: probes must be finite with epoch >= 0");
    }
    e_min = std::min(e_min, p.epoch);
    e_max = std::max(e_max, p.epoch);
  }
  if (!(e_max > e_min)) throw std::invalid_argument("fit_accuracy_curve: probe epochs are degenerate");

  // r must keep e + r > 0 for every probe.
  const double r_lo = std::max(0.0, -e_min) + 1e-9;
  const double log_lo = std::log(std::max(r_lo, 1e-6));
  const double log_hi = std::log(1e6 * std::max(1.0, e_max));
  constexpr int kGrid = 60;
  auto sse_at = [&](double log_r) { return detail::fit_given_offset(probes, std::exp(log_r)).sse; };

  int best = 0;
  std::array<double, kGrid> grid{};
  for (int i = 0; i < kGrid; ++i) {
    grid[i] = sse_at(log_lo + (log_hi - log_lo) * i / (kGrid - 1));
    if (grid[i] < grid[best]) best = i;
  }
  const double r0_sse = detail::fit_given_offset(probes, r_lo).sse;

  double lo = log_lo + (log_hi - log_lo) * std::max(0, best - 1) / (kGrid - 1);
  double hi = log_lo + (log_hi - log_lo) * std::min(kGrid - 1, best + 1) / (kGrid - 1);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = sse_at(x1), f2 = sse_at(x2);
  int iterations = kGrid;
  while (iterations < max_iterations && hi - lo > tolerance) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = sse_at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = sse_at(x2);
    }
    ++iterations;
  }

  double r = std::exp(f1 <= f2 ? x1 : x2);
  if (r0_sse < std::min(f1, f2)) r = r_lo;
  const auto inner = detail::fit_given_offset(probes, r);
  // A flat fit (k = 0) is represented by a vanishing reciprocal term.
  const double k = std::max(inner.k, 1e-12);
  CurveFit out;
  out.curve = {inner.a, 1.0 / k, r / k};
  out.residual = inner.sse;
  out.iterations = iterations;
  return out;
}

/// Gain expected from retraining to target_epoch, never negative.
inline double predict_accuracy_gain(const AccuracyCurve& curve, double target_epoch,
                                    double current_accuracy) {
  if (!(target_epoch >= 1.0)) throw std::invalid_argument("predict_accuracy_gain: target_epoch < 1");
  return std::max(0.0, curve(target_epoch) - current_accuracy);
}

}  // namespace evosched::profiler
