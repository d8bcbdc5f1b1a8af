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

/// @file regressor.hpp
/// @brief Retraining-time regressor: a small feed-forward network over five
/// task features, trained on measured (features, seconds) samples.
///
/// Features and target are log-transformed and standardized, which turns
/// the multiplicative cost structure of retraining into a near-linear
/// problem for the network.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace evosched::profiler {

struct RetrainFeatures {
  double param_mb = 0.0;
  double data_count = 0.0;
  double unfrozen_layers = 0.0;
  double epochs = 0.0;
  double batch = 0.0;

  static constexpr std::size_t kCount = 5;

  [[nodiscard]] std::array<double, kCount> as_array() const noexcept {
    return {param_mb, data_count, unfrozen_layers, epochs, batch};
  }
};

struct TimeSample {
  RetrainFeatures features;
  double seconds = 0.0;
};

struct RegressorOptions {
  std::uint64_t seed = 2024;
  int epochs = 5000;
  double learning_rate = 0.01;
  std::size_t hidden_width = 16;
  std::size_t hidden_layers = 3;
  std::size_t min_samples = 50;
};

class TimeRegressor {
 public:
  struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights;  // row-major, out x in
    std::vector<double> bias;
    bool operator==(const Layer&) const = default;
  };

  TimeRegressor() = default;

  /// Predicted retraining seconds.
  [[nodiscard]] double predict(const RetrainFeatures& f) const {
    if (layers_.empty()) throw std::logic_error("TimeRegressor: not trained");
    const auto x = encode(f);
    std::vector<double> act(x.begin(), x.end()), next;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& layer = layers_[l];
      next.assign(layer.out, 0.0);
      for (std::size_t o = 0; o < layer.out; ++o) {
        double z = layer.bias[o];
        for (std::size_t i = 0; i < layer.in; ++i) z += layer.weights[o * layer.in + i] * act[i];
        next[o] = l + 1 < layers_.size() ? softplus(z) : z;
      }
      act.swap(next);
    }
    return std::exp(act[0] * target_std_ + target_mean_);
  }

  [[nodiscard]] const std::vector<Layer>& layers() const noexcept { return layers_; }

  bool operator==(const TimeRegressor&) const = default;

  void save(std::ostream& os) const;
  static TimeRegressor load(std::istream& is);

  friend TimeRegressor train_time_regressor(std::span<const TimeSample> samples,
                                            const RegressorOptions& options);

 private:
  static double softplus(double z) noexcept {
    return z > 30.0 ? z : std::log1p(std::exp(z));
  }
  static double sigmoid(double z) noexcept { return 1.0 / (1.0 + std::exp(-z)); }

  static void check(const RetrainFeatures& f) {
    for (double v : f.as_array()) {
      if (!std::isfinite(v) || !(v > 0.0)) {
        throw std::invalid_argument("retraining features must be finite and positive");
      }
    }
  }

  [[nodiscard]] std::array<double, RetrainFeatures::kCount> encode(const RetrainFeatures& f) const {
    check(f);
    auto x = f.as_array();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = (std::log(x[i]) - in_mean_[i]) / in_std_[i];
    return x;
  }

  std::vector<Layer> layers_;
  std::array<double, RetrainFeatures::kCount> in_mean_{};
  std::array<double, RetrainFeatures::kCount> in_std_{};
  double target_mean_ = 0.0;
  double target_std_ = 1.0;
};

/// Full-batch Adam on squared error in standardized log space. The result
/// depends only on the samples and options.
inline TimeRegressor train_time_regressor(std::span<const TimeSample> samples,
                                          const RegressorOptions& options = {}) {
  if (samples.size() < options.min_samples) {
    throw std::invalid_argument("train_time_regressor: need at least " +
                                std::to_string(options.min_samples) + " samples, got " +
                                std::to_string(samples.size()));
  }
  if (options.epochs <= 0 || options.hidden_width == 0 || options.hidden_layers == 0) {
    throw std::invalid_argument("train_time_regressor: invalid options");
  }
  constexpr std::size_t F = RetrainFeatures::kCount;
  const std::size_t n = samples.size();
  TimeRegressor reg;

  std::vector<std::array<double, F>> raw(n);
  std::vector<double> target(n);
  for (std::size_t s = 0; s < n; ++s) {
    TimeRegressor::check(samples[s].features);
    if (!std::isfinite(samples[s].seconds) || !(samples[s].seconds > 0.0)) {
      throw std::invalid_argument("train_time_regressor: sample " + std::to_string(s) +
                                  " has non-positive seconds");
    }
    raw[s] = samples[s].features.as_array();
    for (auto& v : raw[s]) v = std::log(v);
    target[s] = std::log(samples[s].seconds);
  }
  auto standardize = [n](auto get, double& mean, double& sd) {
    mean = 0.0;
    for (std::size_t s = 0; s < n; ++s) mean += get(s);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t s = 0; s < n; ++s) var += (get(s) - mean) * (get(s) - mean);
    sd = std::sqrt(var / static_cast<double>(n));
    if (!(sd > 1e-12)) sd = 1.0;
  };
  for (std::size_t i = 0; i < F; ++i) {
    standardize([&](std::size_t s) { return raw[s][i]; }, reg.in_mean_[i], reg.in_std_[i]);
  }
  standardize([&](std::size_t s) { return target[s]; }, reg.target_mean_, reg.target_std_);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t i = 0; i < F; ++i) raw[s][i] = (raw[s][i] - reg.in_mean_[i]) / reg.in_std_[i];
    target[s] = (target[s] - reg.target_mean_) / reg.target_std_;
  }

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> widths{F};
  for (std::size_t h = 0; h < options.hidden_layers; ++h) widths.push_back(options.hidden_width);
  widths.push_back(1);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    TimeRegressor::Layer layer;
    layer.in = widths[l];
    layer.out = widths[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    std::uniform_real_distribution<double> init(-limit, limit);
    layer.weights.resize(layer.in * layer.out);
    for (auto& w : layer.weights) w = init(rng);
    layer.bias.assign(layer.out, 0.0);
    reg.layers_.push_back(std::move(layer));
  }

  const std::size_t L = reg.layers_.size();
  std::vector<std::vector<double>> grad_w(L), grad_b(L), m_w(L), v_w(L), m_b(L), v_b(L);
  for (std::size_t l = 0; l < L; ++l) {
    grad_w[l].assign(reg.layers_[l].weights.size(), 0.0);
    grad_b[l].assign(reg.layers_[l].bias.size(), 0.0);
    m_w[l] = v_w[l] = grad_w[l];
    m_b[l] = v_b[l] = grad_b[l];
  }
  // Pre-activations and activations per layer for one sample.
  std::vector<std::vector<double>> z(L), a(L + 1);
  std::vector<double> delta, prev_delta;
  constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  double b1t = 1.0, b2t = 1.0;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t l = 0; l < L; ++l) {
      std::fill(grad_w[l].begin(), grad_w[l].end(), 0.0);
      std::fill(grad_b[l].begin(), grad_b[l].end(), 0.0);
    }
    for (std::size_t s = 0; s < n; ++s) {
      a[0].assign(raw[s].begin(), raw[s].end());
      for (std::size_t l = 0; l < L; ++l) {
        const auto& layer = reg.layers_[l];
        z[l].assign(layer.out, 0.0);
        a[l + 1].assign(layer.out, 0.0);
        for (std::size_t o = 0; o < layer.out; ++o) {
          double acc = layer.bias[o];
          for (std::size_t i = 0; i < layer.in; ++i) acc += layer.weights[o * layer.in + i] * a[l][i];
          z[l][o] = acc;
          a[l + 1][o] = l + 1 < L ? TimeRegressor::softplus(acc) : acc;
        }
      }
      delta.assign(1, 2.0 * (a[L][0] - target[s]) / static_cast<double>(n));
      for (std::size_t l = L; l-- > 0;) {
        const auto& layer = reg.layers_[l];
        for (std::size_t o = 0; o < layer.out; ++o) {
          grad_b[l][o] += delta[o];
          for (std::size_t i = 0; i < layer.in; ++i) grad_w[l][o * layer.in + i] += delta[o] * a[l][i];
        }
        if (l == 0) break;
        prev_delta.assign(layer.in, 0.0);
        for (std::size_t o = 0; o < layer.out; ++o) {
          for (std::size_t i = 0; i < layer.in; ++i) {
            prev_delta[i] += layer.weights[o * layer.in + i] * delta[o];
          }
        }
        for (std::size_t i = 0; i < layer.in; ++i) prev_delta[i] *= TimeRegressor::sigmoid(z[l - 1][i]);
        delta.swap(prev_delta);
      }
    }
    b1t *= beta1;
    b2t *= beta2;
    const double lr = options.learning_rate * std::sqrt(1.0 - b2t) / (1.0 - b1t);
    auto step = [&](std::vector<double>& param, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
      for (std::size_t k = 0; k < param.size(); ++k) {
        m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
        v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
        param[k] -= lr * m[k] / (std::sqrt(v[k]) + adam_eps);
      }
    };
    for (std::size_t l = 0; l < L; ++l) {
      step(reg.layers_[l].weights, grad_w[l], m_w[l], v_w[l]);
      step(reg.layers_[l].bias, grad_b[l], m_b[l], v_b[l]);
    }
  }
  return reg;
}

inline double predict_retraining_time(const TimeRegressor& reg, const RetrainFeatures& f) {
  return reg.predict(f);
}

/// Mean of |predicted - actual| / actual over the samples.
inline double mean_relative_error(const TimeRegressor& reg, std::span<const TimeSample> samples) {
  if (samples.empty()) throw std::invalid_argument("mean_relative_error: no samples");
  double sum = 0.0;
  for (const auto& s : samples) sum += std::abs(reg.predict(s.features) - s.seconds) / s.seconds;
  return sum / static_cast<double>(samples.size());
}

// Binary layout, all integers and doubles little-endian:
//   "EVTR" | u32 version | u8 endian flag (1 = little) | 5 x (f64 mean, f64 sd)
//   | f64 target mean | f64 target sd | u32 layer count
//   | per layer: u32 in | u32 out | in*out f64 weights | out f64 biases
namespace detail {

inline constexpr std::uint32_t kRegressorVersion = 1;

inline void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b, 4);
}

inline void put_f64(std::ostream& os, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b, 8);
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("regressor file truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline double get_f64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("regressor file truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace detail

inline void TimeRegressor::save(std::ostream& os) const {
  os.write("EVTR", 4);
  detail::put_u32(os, detail::kRegressorVersion);
  os.put(1);
  for (std::size_t i = 0; i < RetrainFeatures::kCount; ++i) {
    detail::put_f64(os, in_mean_[i]);
    detail::put_f64(os, in_std_[i]);
  }
  detail::put_f64(os, target_mean_);
  detail::put_f64(os, target_std_);
  detail::put_u32(os, static_cast<std::uint32_t>(layers_.size()));
  for (const auto& layer : layers_) {
    detail::put_u32(os, static_cast<std::uint32_t>(layer.in));
    detail::put_u32(os, static_cast<std::uint32_t>(layer.out));
    for (double w : layer.weights) detail::put_f64(os, w);
    for (double b : layer.bias) detail::put_f64(os, b);
  }
  if (!os) throw std::runtime_error("failed to write regressor");
}

inline TimeRegressor TimeRegressor::load(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "EVTR") {
    throw std::runtime_error("not a regressor file");
  }
  const auto version = detail::get_u32(is);
  if (version != detail::kRegressorVersion) {
    throw std::runtime_error("unsupported regressor version " + std::to_string(version));
  }
  if (is.get() != 1) throw std::runtime_error("regressor file is not little-endian");
  TimeRegressor reg;
  for (std::size_t i = 0; i < RetrainFeatures::kCount; ++i) {
    reg.in_mean_[i] = detail::get_f64(is);
    reg.in_std_[i] = detail::get_f64(is);
  }
  reg.target_mean_ = detail::get_f64(is);
  reg.target_std_ = detail::get_f64(is);
  const auto count = detail::get_u32(is);
  if (count == 0 || count > 64) throw std::runtime_error("regressor file has a bad layer count");
  std::size_t expected_in = RetrainFeatures::kCount;
  for (std::uint32_t l = 0; l < count; ++l) {
    Layer layer;
    layer.in = detail::get_u32(is);
    layer.out = detail::get_u32(is);
    if (layer.in != expected_in || layer.out == 0 || layer.out > 4096) {
      throw std::runtime_error("regressor file has inconsistent layer shapes");
    }
    layer.weights.resize(layer.in * layer.out);
    for (auto& w : layer.weights) w = detail::get_f64(is);
    layer.bias.resize(layer.out);
    for (auto& b : layer.bias) b = detail::get_f64(is);
    expected_in = layer.out;
    reg.layers_.push_back(std::move(layer));
  }
  if (expected_in != 1) throw std::runtime_error("regressor file must end in a single output");
  return reg;
}

}  // namespace evosched::profiler
