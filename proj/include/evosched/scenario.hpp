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

/// @file scenario.hpp
/// @brief Simulation input: mobile ends, their drift schedules, the edge
/// server and every tunable of the control plane. Loaded from JSON.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "evosched/drift.hpp"
#include "evosched/json_lines.hpp"
#include "evosched/profiler.hpp"
#include "evosched/sampler.hpp"
#include "evosched/scheduler.hpp"

namespace evosched::sim {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Input error carrying the JSON pointer and, when known, the source line.
class ScenarioError : public std::invalid_argument {
 public:
  ScenarioError(std::string pointer, const std::string& message, int line = 0)
      : std::invalid_argument(format(pointer, message, line)),
        pointer_(std::move(pointer)),
        detail_(message),
        line_(line) {}

  [[nodiscard]] const std::string& pointer() const noexcept { return pointer_; }
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }
  [[nodiscard]] int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& pointer, const std::string& message, int line) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    out += (pointer.empty() ? std::string("/") : pointer) + ": " + message;
    return out;
  }

  std::string pointer_;
  std::string detail_;
  int line_;
};

enum class Policy { AdaEvo, DefaultGpu, SerialFifo, SerialPriority, DpNoGrouping };

inline std::string_view to_string(Policy p) noexcept {
  switch (p) {
    case Policy::AdaEvo: return "AdaEvo";
    case Policy::DefaultGpu: return "DefaultGpu";
    case Policy::SerialFifo: return "SerialFifo";
    case Policy::SerialPriority: return "SerialPriority";
    case Policy::DpNoGrouping: return "DpNoGrouping";
  }
  return "unknown";
}

inline std::optional<Policy> parse_policy(std::string_view s) noexcept {
  for (Policy p : {Policy::AdaEvo, Policy::DefaultGpu, Policy::SerialFifo, Policy::SerialPriority,
                   Policy::DpNoGrouping}) {
    if (s == to_string(p)) return p;
  }
  return std::nullopt;
}

struct DriftEventSpec {
  double t = 0.0;
  drift::DriftType type = drift::DriftType::Sudden;
  /// Absolute accuracy drop of the deployed model once the drift settles.
  double magnitude = 0.0;
  /// Transition length in seconds; negative means derive it from the end's
  /// decay rate (sudden drifts default to an instant step).
  double transition = -1.0;
};

struct MobileEndSpec {
  int id = 0;
  profiler::ModelArch arch;
  std::vector<DriftEventSpec> drift_events;
  double frame_rate = 30.0;
  double frame_bytes = 100000.0;
  double base_accuracy = 0.8;
  /// Accuracy lost per second during a drift transition.
  double decay = 0.004;
  profiler::AccuracyCurve gain_curve_truth{0.85, 0.5, 2.0};
  /// Compute-seconds per retraining frame per epoch; when absent the
  /// retraining cost model prices the task.
  std::optional<double> work_per_frame;
  int epochs = 10;
  double unfrozen_fraction = 0.31;
  double data_reduction = 1.0;

  // Trace synthesis.
  double clc_noise = 0.03;
  std::vector<double> pixel_levels{20.0, 60.0};
  double pixel_noise = 3.0;
  double redundant_fraction = 0.0;
  int feature_dim = 4;
  int categories = 2;
  int boxes_per_category = 2;
  double feature_noise = 0.05;
  double feature_shift = 1.0;
  double gradual_floor = 0.12;
  double gradual_exponent = 4.0;

  /// Transition length the synthesizer uses for an event.
  [[nodiscard]] double transition_of(const DriftEventSpec& ev) const {
    if (ev.transition >= 0.0) return ev.transition;
    if (ev.type == drift::DriftType::Sudden) return 0.0;
    return ev.magnitude / decay;
  }
};

struct ServerSpec {
  double mem_capacity_mb = 16384.0;
  double compute_capacity = 1.0;
  int gpu_count = 1;
  /// Largest compute share one task can use, as a fraction of one GPU.
  double task_max_share = 1.0;
};

struct SchedulerSettings {
  double lookahead_factor = 0.1;
  double value_scale = 100.0;
};

struct ProfilerSettings {
  std::uint64_t regressor_seed = 2024;
  int regressor_samples = 200;
  int probe_epochs = 5;
  double probe_noise = 0.005;
};

struct Scenario {
  int schema_version = kSchemaVersion;
  std::uint64_t seed = 1;
  double duration = 3600.0;
  Policy policy = Policy::AdaEvo;
  double uplink_MBps = 10.76;
  double downlink_MBps = 10.76;
  ServerSpec server;
  scheduler::GroupingConfig grouping;
  sampler::SamplerConfig sampler;
  drift::DetectorConfig detector;
  SchedulerSettings scheduling;
  ProfilerSettings profiling;
  std::vector<MobileEndSpec> ends;
};

/// Throws ScenarioError (without a line) on the first violated constraint.
inline void validate(const Scenario& sc) {
  auto fail = [](const std::string& ptr, const std::string& msg) { throw ScenarioError(ptr, msg); };
  if (sc.schema_version != kSchemaVersion) {
    fail("/schema_version", "unsupported schema version " + std::to_string(sc.schema_version));
  }
  if (!(sc.duration > 0.0)) fail("/duration", "must be positive");
  if (!(sc.uplink_MBps > 0.0)) fail("/uplink_MBps", "must be positive");
  if (!(sc.downlink_MBps > 0.0)) fail("/downlink_MBps", "must be positive");
  if (!(sc.server.mem_capacity_mb > 0.0)) fail("/server/mem_capacity_mb", "must be positive");
  if (!(sc.server.compute_capacity > 0.0)) fail("/server/compute_capacity", "must be positive");
  if (sc.server.gpu_count < 1) fail("/server/gpu_count", "must be >= 1");
  if (!(sc.server.task_max_share > 0.0)) fail("/server/task_max_share", "must be positive");
  if (!(sc.scheduling.lookahead_factor >= 0.0)) fail("/scheduler/lookahead_factor", "must be >= 0");
  if (!(sc.scheduling.value_scale > 0.0)) fail("/scheduler/value_scale", "must be positive");
  if (sc.profiling.regressor_samples < 50) fail("/profiler/regressor_samples", "must be >= 50");
  if (sc.profiling.probe_epochs < 3) fail("/profiler/probe_epochs", "must be >= 3");
  if (!(sc.profiling.probe_noise >= 0.0)) fail("/profiler/probe_noise", "must be >= 0");
  try {
    sc.grouping.validate();
  } catch (const std::exception& e) {
    fail("/grouping", e.what());
  }
  try {
    sc.sampler.validate();
  } catch (const std::exception& e) {
    fail("/sampler", e.what());
  }
  try {
    sc.detector.validate();
  } catch (const std::exception& e) {
    fail("/detector", e.what());
  }
  if (sc.ends.empty()) fail("/ends", "at least one mobile end is required");
  for (std::size_t i = 0; i < sc.ends.size(); ++i) {
    const auto& end = sc.ends[i];
    const std::string base = "/ends/" + std::to_string(i);
    for (std::size_t j = 0; j < i; ++j) {
      if (sc.ends[j].id == end.id) fail(base + "/id", "duplicate end id " + std::to_string(end.id));
    }
    if (!(end.frame_rate > 0.0)) fail(base + "/frame_rate", "must be positive");
    if (!(end.frame_bytes > 0.0)) fail(base + "/frame_bytes", "must be positive");
    if (!(end.base_accuracy > 0.0 && end.base_accuracy <= 1.0)) fail(base + "/base_accuracy", "must be in (0, 1]");
    if (!(end.decay > 0.0)) fail(base + "/decay", "must be positive");
    if (end.work_per_frame && !(*end.work_per_frame > 0.0)) fail(base + "/work_per_frame", "must be positive");
    if (end.epochs < 1) fail(base + "/epochs", "must be >= 1");
    if (!(end.unfrozen_fraction > 0.0 && end.unfrozen_fraction <= 1.0)) {
      fail(base + "/unfrozen_fraction", "must be in (0, 1]");
    }
    if (!(end.data_reduction > 0.0 && end.data_reduction <= 1.0)) fail(base + "/data_reduction", "must be in (0, 1]");
    if (!(end.clc_noise >= 0.0) || !(end.pixel_noise >= 0.0) || !(end.feature_noise >= 0.0)) {
      fail(base, "noise levels must be >= 0");
    }
    if (end.pixel_levels.empty()) fail(base + "/pixel_levels", "must not be empty");
    if (!(end.redundant_fraction >= 0.0 && end.redundant_fraction < 1.0)) {
      fail(base + "/redundant_fraction", "must be in [0, 1)");
    }
    if (end.feature_dim < 1 || end.categories < 1 || end.boxes_per_category < 1) {
      fail(base, "feature_dim, categories and boxes_per_category must be >= 1");
    }
    if (!(end.gradual_floor >= 0.0 && end.gradual_floor <= 1.0) || !(end.gradual_exponent > 0.0)) {
      fail(base, "gradual_floor must be in [0, 1] and gradual_exponent positive");
    }
    const auto& g = end.gain_curve_truth;
    if (!(g.b >= 0.0) || !(g.c >= 0.0) || !(g.b + g.c > 0.0)) {
      fail(base + "/gain_curve_truth", "b and c must be non-negative and not both zero");
    }
    try {
      profiler::memory_demand(end.arch);
    } catch (const std::exception& e) {
      fail(base + "/arch", e.what());
    }
    double prev_end = -1.0;
    for (std::size_t k = 0; k < end.drift_events.size(); ++k) {
      const auto& ev = end.drift_events[k];
      const std::string ep = base + "/drift_events/" + std::to_string(k);
      if (!(ev.t >= 0.0) || !(ev.t < sc.duration)) fail(ep + "/t", "must lie within [0, duration)");
      if (!(ev.t > prev_end)) fail(ep + "/t", "drift events must be time-ordered and not overlap");
      if (!(ev.magnitude > 0.0 && ev.magnitude < 1.0)) fail(ep + "/magnitude", "must be in (0, 1)");
      prev_end = ev.t + end.transition_of(ev);
    }
  }
}

// ---------------------------------------------------------------------------
// JSON decoding

namespace detail {

class Reader {
 public:
  Reader(const json& node, std::string pointer) : node_(node), pointer_(std::move(pointer)) {}

  [[nodiscard]] const std::string& pointer() const noexcept { return pointer_; }
  [[nodiscard]] const json& node() const noexcept { return node_; }

  [[nodiscard]] bool has(const char* key) const { return node_.contains(key); }

  [[nodiscard]] Reader child(const char* key) const { return {node_.at(key), pointer_ + "/" + key}; }
  [[nodiscard]] Reader element(std::size_t i) const {
    return {node_.at(i), pointer_ + "/" + std::to_string(i)};
  }

  template <class T>
  void read(const char* key, T& out) const {
    if (!node_.contains(key)) return;
    const json& v = node_.at(key);
    const std::string ptr = pointer_ + "/" + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ScenarioError(ptr, "expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ScenarioError(ptr, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
          throw ScenarioError(ptr, "expected a non-negative integer");
        }
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ScenarioError(ptr, "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ScenarioError(ptr, "expected a string");
    }
    out = v.get<T>();
  }

  void require_object() const {
    if (!node_.is_object()) throw ScenarioError(pointer_, "expected an object");
  }
  void require_array() const {
    if (!node_.is_array()) throw ScenarioError(pointer_, "expected an array");
  }

  void reject_unknown(std::initializer_list<const char*> known) const {
    for (const auto& [key, value] : node_.items()) {
      bool found = false;
      for (const char* k : known) found = found || key == k;
      if (!found) throw ScenarioError(pointer_ + "/" + key, "unknown field");
    }
  }

 private:
  const json& node_;
  std::string pointer_;
};

inline profiler::LayerKind parse_layer_kind(const std::string& s, const std::string& ptr) {
  if (s == "conv") return profiler::LayerKind::Conv;
  if (s == "fc") return profiler::LayerKind::FullyConnected;
  if (s == "bn") return profiler::LayerKind::BatchNorm;
  throw ScenarioError(ptr, "unknown layer kind '" + s + "' (expected conv, fc or bn)");
}

}  // namespace detail

inline profiler::ModelArch arch_from_json(const detail::Reader& r) {
  r.require_object();
  r.reject_unknown({"bitwidth", "input_w", "input_h", "batch", "workspace_mb", "layers"});
  profiler::ModelArch arch;
  r.read("bitwidth", arch.bitwidth);
  r.read("input_w", arch.input_w);
  r.read("input_h", arch.input_h);
  r.read("batch", arch.batch);
  r.read("workspace_mb", arch.workspace_mb);
  if (arch.bitwidth != 8 && arch.bitwidth != 16 && arch.bitwidth != 32) {
    throw ScenarioError(r.pointer() + "/bitwidth", "must be 8, 16 or 32");
  }
  if (r.has("layers")) {
    const auto layers = r.child("layers");
    layers.require_array();
    for (std::size_t i = 0; i < layers.node().size(); ++i) {
      const auto lr = layers.element(i);
      lr.require_object();
      lr.reject_unknown({"kind", "name", "c_in", "c_out", "k", "k1", "k2", "s", "s1", "s2", "p",
                         "p1", "p2"});
      profiler::LayerSpec layer;
      std::string kind;
      if (!lr.has("kind")) throw ScenarioError(lr.pointer() + "/kind", "missing field");
      lr.read("kind", kind);
      layer.kind = detail::parse_layer_kind(kind, lr.pointer() + "/kind");
      lr.read("name", layer.name);
      lr.read("c_in", layer.c_in);
      lr.read("c_out", layer.c_out);
      lr.read("k", layer.k1);
      lr.read("k", layer.k2);
      lr.read("k1", layer.k1);
      lr.read("k2", layer.k2);
      lr.read("s", layer.s1);
      lr.read("s", layer.s2);
      lr.read("s1", layer.s1);
      lr.read("s2", layer.s2);
      lr.read("p", layer.p1);
      lr.read("p", layer.p2);
      lr.read("p1", layer.p1);
      lr.read("p2", layer.p2);
      arch.layers.push_back(layer);
    }
  }
  // Dimensional consistency is checked here so errors point at the layer.
  try {
    profiler::memory_demand(arch);
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    std::string ptr = r.pointer() + "/layers";
    if (msg.rfind("layer ", 0) == 0) {
      const auto idx = std::stoul(msg.substr(6));
      ptr += "/" + std::to_string(idx);
    }
    throw ScenarioError(ptr, msg);
  }
  return arch;
}

inline Scenario scenario_from_json(const json& root) {
  const detail::Reader r(root, "");
  r.require_object();
  r.reject_unknown({"schema_version", "seed", "duration", "policy", "uplink_MBps", "downlink_MBps",
                    "server", "grouping", "sampler", "detector", "scheduler", "profiler", "ends"});
  if (!r.has("schema_version")) throw ScenarioError("/schema_version", "missing field");
  Scenario sc;
  r.read("schema_version", sc.schema_version);
  if (sc.schema_version != kSchemaVersion) {
    throw ScenarioError("/schema_version", "unsupported schema version " + std::to_string(sc.schema_version));
  }
  r.read("seed", sc.seed);
  r.read("duration", sc.duration);
  if (r.has("policy")) {
    std::string p;
    r.read("policy", p);
    const auto parsed = parse_policy(p);
    if (!parsed) throw ScenarioError("/policy", "unknown policy '" + p + "'");
    sc.policy = *parsed;
  }
  r.read("uplink_MBps", sc.uplink_MBps);
  r.read("downlink_MBps", sc.downlink_MBps);
  if (r.has("server")) {
    const auto s = r.child("server");
    s.require_object();
    s.reject_unknown({"mem_capacity_mb", "compute_capacity", "gpu_count", "task_max_share"});
    s.read("mem_capacity_mb", sc.server.mem_capacity_mb);
    s.read("compute_capacity", sc.server.compute_capacity);
    s.read("gpu_count", sc.server.gpu_count);
    s.read("task_max_share", sc.server.task_max_share);
  }
  if (r.has("grouping")) {
    const auto g = r.child("grouping");
    g.require_object();
    g.reject_unknown({"n_max", "n_min", "eps_range", "sigma", "lambda_min", "lambda_max"});
    g.read("n_max", sc.grouping.n_max);
    g.read("n_min", sc.grouping.n_min);
    g.read("eps_range", sc.grouping.eps_range);
    g.read("lambda_min", sc.grouping.lambda_min);
    g.read("lambda_max", sc.grouping.lambda_max);
    sc.grouping.sigma = (sc.grouping.lambda_max - sc.grouping.lambda_min) / 6.0;
    g.read("sigma", sc.grouping.sigma);
  }
  if (r.has("sampler")) {
    const auto s = r.child("sampler");
    s.require_object();
    s.reject_unknown({"r_f", "r0", "delta_r", "r_max", "eps1", "eps2", "frame_w", "frame_h",
                      "segment_seconds"});
    s.read("r_f", sc.sampler.r_f);
    s.read("r0", sc.sampler.r0);
    s.read("delta_r", sc.sampler.delta_r);
    s.read("r_max", sc.sampler.r_max);
    s.read("eps1", sc.sampler.eps1);
    s.read("eps2", sc.sampler.eps2);
    s.read("frame_w", sc.sampler.frame_w);
    s.read("frame_h", sc.sampler.frame_h);
    s.read("segment_seconds", sc.sampler.segment_seconds);
  }
  if (r.has("detector")) {
    const auto d = r.child("detector");
    d.require_object();
    d.reject_unknown({"window_frames", "sub_windows", "temp_window_frames", "rod_threshold",
                      "variance_threshold", "tau", "d0_factor", "onset_allowance"});
    d.read("window_frames", sc.detector.window_frames);
    d.read("sub_windows", sc.detector.sub_windows);
    d.read("temp_window_frames", sc.detector.temp_window_frames);
    d.read("rod_threshold", sc.detector.rod_threshold);
    d.read("variance_threshold", sc.detector.variance_threshold);
    d.read("tau", sc.detector.tau);
    d.read("d0_factor", sc.detector.d0_factor);
    d.read("onset_allowance", sc.detector.onset_allowance);
  }
  if (r.has("scheduler")) {
    const auto s = r.child("scheduler");
    s.require_object();
    s.reject_unknown({"lookahead_factor", "value_scale"});
    s.read("lookahead_factor", sc.scheduling.lookahead_factor);
    s.read("value_scale", sc.scheduling.value_scale);
  }
  if (r.has("profiler")) {
    const auto p = r.child("profiler");
    p.require_object();
    p.reject_unknown({"regressor_seed", "regressor_samples", "probe_epochs", "probe_noise"});
    p.read("regressor_seed", sc.profiling.regressor_seed);
    p.read("regressor_samples", sc.profiling.regressor_samples);
    p.read("probe_epochs", sc.profiling.probe_epochs);
    p.read("probe_noise", sc.profiling.probe_noise);
  }
  if (!r.has("ends")) throw ScenarioError("/ends", "missing field");
  const auto ends = r.child("ends");
  ends.require_array();
  for (std::size_t i = 0; i < ends.node().size(); ++i) {
    const auto e = ends.element(i);
    e.require_object();
    e.reject_unknown({"id", "arch", "drift_events", "frame_rate", "frame_bytes", "base_accuracy",
                      "decay", "gain_curve_truth", "work_per_frame", "epochs", "unfrozen_fraction",
                      "data_reduction", "clc_noise", "pixel_levels", "pixel_noise",
                      "redundant_fraction", "feature_dim", "categories", "boxes_per_category",
                      "feature_noise", "feature_shift", "gradual_floor", "gradual_exponent"});
    MobileEndSpec end;
    end.id = static_cast<int>(i);
    e.read("id", end.id);
    if (!e.has("arch")) throw ScenarioError(e.pointer() + "/arch", "missing field");
    end.arch = arch_from_json(e.child("arch"));
    e.read("frame_rate", end.frame_rate);
    e.read("frame_bytes", end.frame_bytes);
    e.read("base_accuracy", end.base_accuracy);
    e.read("decay", end.decay);
    if (e.has("gain_curve_truth")) {
      const auto g = e.child("gain_curve_truth");
      g.require_object();
      g.reject_unknown({"a_max", "b", "c"});
      g.read("a_max", end.gain_curve_truth.a_max);
      g.read("b", end.gain_curve_truth.b);
      g.read("c", end.gain_curve_truth.c);
    }
    if (e.has("work_per_frame")) {
      double w = 0.0;
      e.read("work_per_frame", w);
      end.work_per_frame = w;
    }
    e.read("epochs", end.epochs);
    e.read("unfrozen_fraction", end.unfrozen_fraction);
    e.read("data_reduction", end.data_reduction);
    e.read("clc_noise", end.clc_noise);
    if (e.has("pixel_levels")) {
      const auto p = e.child("pixel_levels");
      p.require_array();
      end.pixel_levels.clear();
      for (std::size_t k = 0; k < p.node().size(); ++k) {
        if (!p.node()[k].is_number()) {
          throw ScenarioError(p.pointer() + "/" + std::to_string(k), "expected a number");
        }
        end.pixel_levels.push_back(p.node()[k].get<double>());
      }
    }
    e.read("pixel_noise", end.pixel_noise);
    e.read("redundant_fraction", end.redundant_fraction);
    e.read("feature_dim", end.feature_dim);
    e.read("categories", end.categories);
    e.read("boxes_per_category", end.boxes_per_category);
    e.read("feature_noise", end.feature_noise);
    e.read("feature_shift", end.feature_shift);
    e.read("gradual_floor", end.gradual_floor);
    e.read("gradual_exponent", end.gradual_exponent);
    if (e.has("drift_events")) {
      const auto evs = e.child("drift_events");
      evs.require_array();
      for (std::size_t k = 0; k < evs.node().size(); ++k) {
        const auto ev = evs.element(k);
        ev.require_object();
        ev.reject_unknown({"t", "type", "magnitude", "transition"});
        DriftEventSpec spec;
        for (const char* key : {"t", "type", "magnitude"}) {
          if (!ev.has(key)) throw ScenarioError(ev.pointer() + "/" + key, "missing field");
        }
        ev.read("t", spec.t);
        std::string type;
        ev.read("type", type);
        const auto parsed = drift::parse_drift_type(type);
        if (!parsed) throw ScenarioError(ev.pointer() + "/type", "unknown drift type '" + type + "'");
        spec.type = *parsed;
        ev.read("magnitude", spec.magnitude);
        ev.read("transition", spec.transition);
        end.drift_events.push_back(spec);
      }
    }
    sc.ends.push_back(std::move(end));
  }
  validate(sc);
  return sc;
}

inline json arch_to_json(const profiler::ModelArch& arch) {
  json layers = json::array();
  for (const auto& l : arch.layers) {
    json j{{"kind", std::string(profiler::to_string(l.kind))}, {"c_in", l.c_in}, {"c_out", l.c_out}};
    if (!l.name.empty()) j["name"] = l.name;
    if (l.kind == profiler::LayerKind::Conv) {
      j["k1"] = l.k1;
      j["k2"] = l.k2;
      j["s1"] = l.s1;
      j["s2"] = l.s2;
      j["p1"] = l.p1;
      j["p2"] = l.p2;
    }
    layers.push_back(std::move(j));
  }
  return {{"bitwidth", arch.bitwidth}, {"input_w", arch.input_w}, {"input_h", arch.input_h},
          {"batch", arch.batch},       {"workspace_mb", arch.workspace_mb}, {"layers", layers}};
}

inline json scenario_to_json(const Scenario& sc) {
  json ends = json::array();
  for (const auto& e : sc.ends) {
    json events = json::array();
    for (const auto& ev : e.drift_events) {
      events.push_back({{"t", ev.t},
                        {"type", std::string(drift::to_string(ev.type))},
                        {"magnitude", ev.magnitude},
                        {"transition", ev.transition}});
    }
    json j{{"id", e.id},
           {"arch", arch_to_json(e.arch)},
           {"drift_events", events},
           {"frame_rate", e.frame_rate},
           {"frame_bytes", e.frame_bytes},
           {"base_accuracy", e.base_accuracy},
           {"decay", e.decay},
           {"gain_curve_truth",
            {{"a_max", e.gain_curve_truth.a_max}, {"b", e.gain_curve_truth.b}, {"c", e.gain_curve_truth.c}}},
           {"epochs", e.epochs},
           {"unfrozen_fraction", e.unfrozen_fraction},
           {"data_reduction", e.data_reduction},
           {"clc_noise", e.clc_noise},
           {"pixel_levels", e.pixel_levels},
           {"pixel_noise", e.pixel_noise},
           {"redundant_fraction", e.redundant_fraction},
           {"feature_dim", e.feature_dim},
           {"categories", e.categories},
           {"boxes_per_category", e.boxes_per_category},
           {"feature_noise", e.feature_noise},
           {"feature_shift", e.feature_shift},
           {"gradual_floor", e.gradual_floor},
           {"gradual_exponent", e.gradual_exponent}};
    if (e.work_per_frame) j["work_per_frame"] = *e.work_per_frame;
    ends.push_back(std::move(j));
  }
  const auto& g = sc.grouping;
  const auto& s = sc.sampler;
  const auto& d = sc.detector;
  return {{"schema_version", sc.schema_version},
          {"seed", sc.seed},
          {"duration", sc.duration},
          {"policy", std::string(to_string(sc.policy))},
          {"uplink_MBps", sc.uplink_MBps},
          {"downlink_MBps", sc.downlink_MBps},
          {"server",
           {{"mem_capacity_mb", sc.server.mem_capacity_mb},
            {"compute_capacity", sc.server.compute_capacity},
            {"gpu_count", sc.server.gpu_count},
            {"task_max_share", sc.server.task_max_share}}},
          {"grouping",
           {{"n_max", g.n_max},
            {"n_min", g.n_min},
            {"eps_range", g.eps_range},
            {"sigma", g.sigma},
            {"lambda_min", g.lambda_min},
            {"lambda_max", g.lambda_max}}},
          {"sampler",
           {{"r_f", s.r_f},
            {"r0", s.r0},
            {"delta_r", s.delta_r},
            {"r_max", s.r_max},
            {"eps1", s.eps1},
            {"eps2", s.eps2},
            {"frame_w", s.frame_w},
            {"frame_h", s.frame_h},
            {"segment_seconds", s.segment_seconds}}},
          {"detector",
           {{"window_frames", d.window_frames},
            {"sub_windows", d.sub_windows},
            {"temp_window_frames", d.temp_window_frames},
            {"rod_threshold", d.rod_threshold},
            {"variance_threshold", d.variance_threshold},
            {"tau", d.tau},
            {"d0_factor", d.d0_factor},
            {"onset_allowance", d.onset_allowance}}},
          {"scheduler",
           {{"lookahead_factor", sc.scheduling.lookahead_factor},
            {"value_scale", sc.scheduling.value_scale}}},
          {"profiler",
           {{"regressor_seed", sc.profiling.regressor_seed},
            {"regressor_samples", sc.profiling.regressor_samples},
            {"probe_epochs", sc.profiling.probe_epochs},
            {"probe_noise", sc.profiling.probe_noise}}},
          {"ends", ends}};
}

namespace detail {

inline int line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

}  // namespace detail

/// Parses JSON text; every error carries the line it refers to.
template <class Decode>
auto decode_json_text(std::string_view text, Decode decode) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ScenarioError("", std::string("malformed JSON: ") + e.what(),
                        detail::line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  try {
    return decode(root);
  } catch (const ScenarioError& e) {
    const io::JsonLineIndex index(text);
    throw ScenarioError(e.pointer(), e.detail(), index.line_of(e.pointer()));
  } catch (const json::exception& e) {
    throw ScenarioError("", e.what());
  }
}

inline Scenario parse_scenario(std::string_view text) {
  return decode_json_text(text, [](const json& root) { return scenario_from_json(root); });
}

inline profiler::ModelArch parse_arch(std::string_view text) {
  return decode_json_text(text, [](const json& root) { return arch_from_json(detail::Reader(root, "")); });
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Scenario load_scenario(const std::string& path) { return parse_scenario(read_text_file(path)); }

}  // namespace evosched::sim
