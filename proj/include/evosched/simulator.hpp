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

/// @file simulator.hpp
/// @brief Discrete-event simulation of mobile ends, network links and the
/// shared edge GPU pool, producing per-task life cycles and QoE metrics.
///
/// Event order is (time, insertion sequence), so simultaneous events run
/// first-in first-out and every run is reproducible from the seed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <queue>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "evosched/core.hpp"
#include "evosched/cost_model.hpp"
#include "evosched/drift.hpp"
#include "evosched/profiler.hpp"
#include "evosched/regressor.hpp"
#include "evosched/rng.hpp"
#include "evosched/sampler.hpp"
#include "evosched/scenario.hpp"
#include "evosched/scheduler.hpp"
#include "evosched/trace.hpp"

namespace evosched::sim {

/// Raised when the simulation reaches a state its invariants forbid.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Network transfer size unit (decimal, as link rates are quoted).
inline constexpr double kBytesPerNetMB = 1e6;

struct TaskRecord {
  int task_id = 0;
  int end_id = 0;
  drift::DriftType drift_type = drift::DriftType::Sudden;
  double t1 = 0.0;
  double t_request = 0.0;
  double arrival_t = 0.0;
  double admit_t = 0.0;
  double done_t = 0.0;
  double deploy_t = 0.0;
  core::LifeCycle cycle;
  double qoe = 0.0;
  double urgency = 0.0;
  double current_accuracy = 0.0;
  double predicted_gain = 0.0;
  double mem_mb = 0.0;
  double predicted_t_r = 0.0;
  double work = 0.0;
  std::size_t frames = 0;
  int group = 0;

  bool operator==(const TaskRecord&) const = default;
};

struct EndSummary {
  int end_id = 0;
  std::size_t cycles = 0;
  double mean_qoe = 0.0;
  double mean_urgency = 0.0;
  double mean_evolving_time = 0.0;

  bool operator==(const EndSummary&) const = default;
};

struct SimMetrics {
  Policy policy = Policy::AdaEvo;
  std::vector<TaskRecord> tasks;
  std::vector<EndSummary> ends;
  core::QoEReport qoe;
  double mean_t_s = 0.0;
  double sd_t_s = 0.0;
  double mean_t_r = 0.0;
  double sd_t_r = 0.0;
  double mean_evolving_time = 0.0;
  double end_time = 0.0;
  std::size_t decisions = 0;
  int group_count = 0;

  bool operator==(const SimMetrics& o) const {
    auto same_report = [](const core::QoEReport& a, const core::QoEReport& b) {
      if (a.per_end_qoe.size() != b.per_end_qoe.size()) return false;
      for (std::size_t i = 0; i < a.per_end_qoe.size(); ++i) {
        const auto &x = a.per_end_qoe[i], &y = b.per_end_qoe[i];
        if (x.end_id != y.end_id || x.urgency != y.urgency || x.qoe != y.qoe) return false;
      }
      return a.q_avg == b.q_avg && a.sd_schedule == b.sd_schedule && a.sd_retrain == b.sd_retrain &&
             a.q_t == b.q_t && a.penalty_weights.schedule == b.penalty_weights.schedule &&
             a.penalty_weights.retrain == b.penalty_weights.retrain;
    };
    return policy == o.policy && tasks == o.tasks && ends == o.ends && same_report(qoe, o.qoe) &&
           mean_t_s == o.mean_t_s && sd_t_s == o.sd_t_s && mean_t_r == o.mean_t_r &&
           sd_t_r == o.sd_t_r && mean_evolving_time == o.mean_evolving_time &&
           end_time == o.end_time && decisions == o.decisions && group_count == o.group_count;
  }
};

struct RunOptions {
  /// Receives one JSON line per scheduling decision.
  std::ostream* decision_log = nullptr;
  /// Accumulates wall-clock seconds spent inside scheduling decisions.
  double* scheduler_wall_seconds = nullptr;
};

/// Regressor trained on the cost model; shared across runs in a process.
inline std::shared_ptr<const profiler::TimeRegressor> shared_regressor(std::uint64_t seed, int samples) {
  static std::mutex mutex;
  static std::map<std::pair<std::uint64_t, int>, std::shared_ptr<const profiler::TimeRegressor>> cache;
  const std::lock_guard lock(mutex);
  auto& slot = cache[{seed, samples}];
  if (!slot) {
    const auto data = sample_cost_dataset(static_cast<std::size_t>(samples), seed);
    profiler::RegressorOptions options;
    options.seed = seed;
    slot = std::make_shared<const profiler::TimeRegressor>(profiler::train_time_regressor(data, options));
  }
  return slot;
}

namespace detail {

struct Event {
  enum class Kind { FrameTick, UploadDone, RetrainDone, DownloadDone };
  double t = 0.0;
  std::uint64_t seq = 0;
  Kind kind = Kind::FrameTick;
  int subject = 0;  // end index or task id
  std::uint64_t generation = 0;

  bool operator>(const Event& o) const { return t != o.t ? t > o.t : seq > o.seq; }
};

struct EndState {
  const MobileEndSpec* spec = nullptr;
  std::unique_ptr<TraceSynth> synth;
  drift::DriftDetector detector;
  std::vector<drift::FrameRecord> buffer;
  std::uint64_t frame_index = 0;
  int outstanding = 0;
  double last_deploy = 0.0;
  // Running integral of expected accuracy, sampled at frame boundaries.
  std::vector<double> integral_t{0.0};
  std::vector<double> integral{0.0};

  [[nodiscard]] double accuracy_integral_at(double t) const {
    const auto it = std::upper_bound(integral_t.begin(), integral_t.end(), t);
    const auto i = static_cast<std::size_t>(it - integral_t.begin()) - 1;
    if (i + 1 >= integral_t.size()) return integral.back();
    const double frac = (t - integral_t[i]) / (integral_t[i + 1] - integral_t[i]);
    return integral[i] + frac * (integral[i + 1] - integral[i]);
  }
  profiler::MemoryBreakdown memory;
  double param_mb = 0.0;
  double unfrozen_layers = 1.0;
};

struct ActiveTask {
  scheduler::EvolutionTask task;
  TaskRecord record;
  int target_concept = 0;
  double cycle_start = 0.0;
  double remaining_work = 0.0;
  double rate = 0.0;
  double last_progress_t = 0.0;
  std::uint64_t generation = 0;
};

class Simulation {
 public:
  Simulation(const Scenario& sc, const RunOptions& opts) : sc_(sc), opts_(opts) {
    validate(sc_);
    regressor_ = shared_regressor(sc_.profiling.regressor_seed, sc_.profiling.regressor_samples);
    mem_capacity_ = sc_.server.mem_capacity_mb * sc_.server.gpu_count;
    compute_total_ = sc_.server.compute_capacity * sc_.server.gpu_count;
    rate_cap_ = sc_.server.task_max_share * sc_.server.compute_capacity;
    pool_.mem_capacity = mem_capacity_;
    pool_.compute_capacity = compute_total_;
    if (sc_.policy == Policy::AdaEvo) {
      // No tail in range holds n_min requests: every task shares one band.
      try {
        group_count_ = scheduler::group_number(sc_.grouping);
      } catch (const std::domain_error&) {
        group_count_ = 1;
      }
      boundaries_ = scheduler::group_boundaries(group_count_, sc_.grouping.lambda_min,
                                                sc_.grouping.lambda_max, sc_.grouping.sigma);
    }
    for (const auto& spec : sc_.ends) {
      EndState st;
      st.spec = &spec;
      st.synth = std::make_unique<TraceSynth>(spec, sc_.seed);
      st.detector = drift::DriftDetector(sc_.detector);
      st.memory = profiler::memory_demand(spec.arch);
      st.param_mb = profiler::param_bytes(spec.arch) / profiler::kBytesPerMB;
      st.unfrozen_layers = std::max(1.0, std::round(spec.unfrozen_fraction * static_cast<double>(spec.arch.layers.size())));
      if (st.param_mb <= 0.0) st.param_mb = 1.0;
      ends_.push_back(std::move(st));
    }
  }

  SimMetrics run() {
    for (std::size_t e = 0; e < ends_.size(); ++e) push(0.0, Event::Kind::FrameTick, static_cast<int>(e));
    const double horizon = sc_.duration * 1000.0 + 1e7;
    while (!events_.empty()) {
      const Event ev = events_.top();
      events_.pop();
      if (ev.t < now_) throw InvariantError("event scheduled in the past");
      if (ev.t > horizon) throw InvariantError("simulation failed to drain outstanding tasks");
      now_ = ev.t;
      switch (ev.kind) {
        case Event::Kind::FrameTick: on_frame(static_cast<std::size_t>(ev.subject)); break;
        case Event::Kind::UploadDone: on_arrival(ev.subject); break;
        case Event::Kind::RetrainDone: on_retrained(ev.subject, ev.generation); break;
        case Event::Kind::DownloadDone: on_deployed(ev.subject); break;
      }
      // Tasks arriving at the same instant compete in one decision.
      if (arrival_decision_due_ && (events_.empty() || events_.top().t > now_ ||
                                    events_.top().kind != Event::Kind::UploadDone)) {
        arrival_decision_due_ = false;
        decide(false, 0.0);
      }
    }
    if (!pending_.empty() || !active_.empty()) throw InvariantError("tasks left unfinished");
    return summarize();
  }

 private:
  using Event = detail::Event;

  void push(double t, Event::Kind kind, int subject, std::uint64_t generation = 0) {
    events_.push(Event{t, seq_++, kind, subject, generation});
  }

  void on_frame(std::size_t e) {
    auto& st = ends_[e];
    const auto sf = st.synth->next();
    const double dt = 1.0 / st.spec->frame_rate;
    st.integral_t.push_back(sf.frame.t + dt);
    st.integral.push_back(st.integral.back() + sf.expected_accuracy * dt);
    ++st.frame_index;
    if (sf.frame.t < sc_.duration) {
      st.buffer.push_back(sf.frame);
      if (auto drift_event = st.detector.update(st.buffer.back())) create_task(e, *drift_event);
    }
    const double next_t = static_cast<double>(st.frame_index) / st.spec->frame_rate;
    // Past the duration an end keeps running only until its pending
    // evolutions are deployed, so their life cycles can close.
    if (next_t < sc_.duration || st.outstanding > 0) push(next_t, Event::Kind::FrameTick, static_cast<int>(e));
  }

  void create_task(std::size_t e, const drift::DriftEvent& dev) {
    auto& st = ends_[e];
    const auto& spec = *st.spec;
    const auto first = std::lower_bound(st.buffer.begin(), st.buffer.end(), dev.t1,
                                        [](const drift::FrameRecord& f, double t) { return f.t < t; });
    const std::span<const drift::FrameRecord> window(&*first, static_cast<std::size_t>(st.buffer.end() - first));
    const auto selected = sampler::sample_for(dev.drift_type, window, sc_.sampler, st.synth->expected_features());
    const std::size_t frames = std::max<std::size_t>(1, selected.size());

    ActiveTask at;
    auto& rec = at.record;
    rec.task_id = next_task_id_++;
    rec.end_id = spec.id;
    rec.drift_type = dev.drift_type;
    rec.t1 = dev.t1;
    rec.t_request = dev.t3;
    rec.frames = frames;
    rec.cycle.t_upload = static_cast<double>(frames) * spec.frame_bytes / (sc_.uplink_MBps * kBytesPerNetMB);
    rec.arrival_t = rec.t_request + rec.cycle.t_upload;
    rec.cycle.t_infer = std::max(0.0, rec.t_request - st.last_deploy);

    profiler::RetrainFeatures features;
    features.param_mb = st.param_mb;
    features.data_count = static_cast<double>(frames) * spec.data_reduction;
    features.unfrozen_layers = st.unfrozen_layers;
    features.epochs = spec.epochs;
    features.batch = static_cast<double>(spec.arch.batch);
    rec.mem_mb = st.memory.total_mb();
    const double solo_rate = std::min(compute_total_, rate_cap_);
    rec.predicted_t_r = regressor_->predict(features) / solo_rate;
    rec.work = spec.work_per_frame
                   ? static_cast<double>(frames) * spec.epochs * *spec.work_per_frame * spec.data_reduction
                   : retrain_cost_seconds(features);

    auto probe_rng = stream(sc_.seed, "probe", {static_cast<std::uint64_t>(spec.id),
                                                static_cast<std::uint64_t>(rec.task_id)});
    std::normal_distribution<double> noise(0.0, sc_.profiling.probe_noise);
    std::vector<profiler::AccuracyProbe> probes;
    for (int k = 1; k <= sc_.profiling.probe_epochs; ++k) {
      const double acc = spec.gain_curve_truth(k) + (sc_.profiling.probe_noise > 0.0 ? noise(probe_rng) : 0.0);
      probes.push_back({static_cast<double>(k), acc});
    }
    const auto fit = profiler::fit_accuracy_curve(probes);
    rec.current_accuracy = std::clamp(dev.clc_new, 1e-3, 1.0);
    rec.predicted_gain = profiler::predict_accuracy_gain(fit.curve, spec.epochs, rec.current_accuracy);
    rec.urgency = core::urgency({rec.current_accuracy, rec.predicted_gain});

    at.task.id = rec.task_id;
    at.task.end_id = spec.id;
    at.task.arrival_t = rec.arrival_t;
    at.task.urgency = rec.urgency;
    at.task.mem_demand = rec.mem_mb;
    at.task.predicted_t_r = rec.predicted_t_r;
    at.task.work = rec.work;
    at.target_concept = st.synth->concept_at(dev.t3);
    at.remaining_work = rec.work;

    if (rec.mem_mb > mem_capacity_) {
      throw ScenarioError("/ends", "end " + std::to_string(spec.id) + " needs " +
                                       std::to_string(rec.mem_mb) + " MB, more than the server holds");
    }
    at.cycle_start = st.last_deploy;
    ++st.outstanding;
    st.buffer.clear();
    push(rec.arrival_t, Event::Kind::UploadDone, rec.task_id);
    active_.emplace(rec.task_id, std::move(at));
  }

  void on_arrival(int id) {
    auto& at = active_.at(id);
    if (sc_.policy == Policy::AdaEvo) at.task.group = scheduler::assign_group(at.task.urgency, boundaries_);
    at.record.group = at.task.group;
    pending_.push_back(id);
    arrival_decision_due_ = true;
  }

  void on_retrained(int id, std::uint64_t generation) {
    auto it = active_.find(id);
    if (it == active_.end() || it->second.generation != generation || !pool_.running.contains(id)) return;
    advance_progress();
    auto& at = it->second;
    at.record.done_t = now_;
    at.record.cycle.t_retrain = now_ - at.record.admit_t;
    pool_.running.erase(id);
    running_groups_.erase(id);
    const auto& spec = *ends_[end_index(at.record.end_id)].spec;
    const double delta_bytes = profiler::param_bytes(spec.arch) * spec.unfrozen_fraction;
    at.record.cycle.t_download = delta_bytes / (sc_.downlink_MBps * kBytesPerNetMB);
    push(now_ + at.record.cycle.t_download, Event::Kind::DownloadDone, id);
    decide(true, at.task.predicted_t_r);
  }

  void on_deployed(int id) {
    auto node = active_.extract(id);
    auto& at = node.mapped();
    auto& st = ends_[end_index(at.record.end_id)];
    auto& rec = at.record;
    rec.deploy_t = now_;
    const double span = now_ - at.cycle_start;
    const double area = st.accuracy_integral_at(now_) - st.accuracy_integral_at(at.cycle_start);
    rec.cycle.avg_accuracy = span > 0.0 ? std::clamp(area / span, 0.0, 1.0) : 0.0;
    rec.qoe = core::qoe_single(rec.cycle);
    finished_.push_back(rec);
    --st.outstanding;

    // A model retrained for an older scene than the deployed one is dropped.
    if (at.target_concept < st.synth->model_concept()) return;
    st.synth->deploy(at.target_concept, st.spec->gain_curve_truth(st.spec->epochs));
    st.last_deploy = now_;
    st.detector.reset();
    st.buffer.clear();
  }

  [[nodiscard]] std::size_t end_index(int end_id) const {
    for (std::size_t i = 0; i < ends_.size(); ++i) {
      if (ends_[i].spec->id == end_id) return i;
    }
    throw InvariantError("unknown end id");
  }

  void advance_progress() {
    for (auto& [id, rt] : pool_.running) {
      auto& at = active_.at(id);
      at.remaining_work = std::max(0.0, at.remaining_work - at.rate * (now_ - at.last_progress_t));
      at.last_progress_t = now_;
    }
  }

  void admit(int id) {
    auto& at = active_.at(id);
    at.record.admit_t = now_;
    at.record.cycle.t_schedule = now_ - at.record.arrival_t;
    at.last_progress_t = now_;
    pool_.running[id] = scheduler::RunningTask{at.task.mem_demand, 0.0, now_, at.task.predicted_t_r};
    running_groups_[id] = at.task.group;
    std::erase(pending_, id);
  }

  void reallocate() {
    std::map<int, double> rates;
    const auto n = static_cast<double>(pool_.running.size());
    switch (sc_.policy) {
      case Policy::AdaEvo:
      case Policy::DpNoGrouping: {
        std::vector<scheduler::EvolutionTask> running;
        for (const auto& [id, rt] : pool_.running) running.push_back(active_.at(id).task);
        for (const auto& [id, share] : scheduler::allocate_compute(running, compute_total_)) {
          rates[id] = std::min(share, rate_cap_);
        }
        break;
      }
      case Policy::DefaultGpu:
        // Time slicing runs one context at a time, so a task cannot use
        // more than its own cap even while it holds the GPU.
        for (const auto& [id, rt] : pool_.running) rates[id] = std::min(compute_total_, rate_cap_) / n;
        break;
      case Policy::SerialFifo:
      case Policy::SerialPriority:
        for (const auto& [id, rt] : pool_.running) rates[id] = std::min(compute_total_, rate_cap_);
        break;
    }
    double used_mem = 0.0, used_compute = 0.0;
    for (auto& [id, rt] : pool_.running) {
      auto& at = active_.at(id);
      at.rate = rates.at(id);
      rt.compute_share = at.rate;
      rt.predicted_completion = now_ + at.remaining_work / at.rate;
      ++at.generation;
      push(rt.predicted_completion, Event::Kind::RetrainDone, id, at.generation);
      used_mem += rt.mem;
      used_compute += rt.compute_share;
    }
    if (used_mem > mem_capacity_ * (1.0 + 1e-12) + 1e-9) throw InvariantError("memory over-committed");
    if (used_compute > compute_total_ * (1.0 + 1e-12) + 1e-12) throw InvariantError("compute over-committed");
  }

  std::vector<scheduler::EvolutionTask> pending_tasks() const {
    std::vector<scheduler::EvolutionTask> out;
    for (int id : pending_) out.push_back(active_.at(id).task);
    return out;
  }

  void decide(bool at_completion, double ref_retrain_time) {
    const auto wall_start = std::chrono::steady_clock::now();
    std::vector<int> admitted;
    // Tasks finishing at this same instant still hold memory until their
    // own completion event runs.
    double capacity = pool_.mem_capacity - pool_.allocated_memory();
    std::optional<double> postponed_to;
    std::vector<int> candidates = pending_;

    switch (sc_.policy) {
      case Policy::SerialFifo:
      case Policy::SerialPriority: {
        if (!pool_.running.empty() || pending_.empty()) break;
        auto better = [&](int a, int b) {
          const auto &ta = active_.at(a).task, &tb = active_.at(b).task;
          if (sc_.policy == Policy::SerialPriority && ta.urgency != tb.urgency) return ta.urgency > tb.urgency;
          return ta.arrival_t != tb.arrival_t ? ta.arrival_t < tb.arrival_t : a < b;
        };
        admitted.push_back(*std::min_element(pending_.begin(), pending_.end(), better));
        break;
      }
      case Policy::DefaultGpu: {
        auto queue = pending_;
        std::sort(queue.begin(), queue.end(), [&](int a, int b) {
          const auto &ta = active_.at(a).task, &tb = active_.at(b).task;
          return ta.arrival_t != tb.arrival_t ? ta.arrival_t < tb.arrival_t : a < b;
        });
        double free = capacity;
        for (int id : queue) {
          const double mem = active_.at(id).task.mem_demand;
          if (mem > free) break;
          free -= mem;
          admitted.push_back(id);
        }
        break;
      }
      case Policy::AdaEvo:
      case Policy::DpNoGrouping: {
        if (pending_.empty()) break;
        if (at_completion) {
          const auto cd = scheduler::decide_capacity(pool_, now_, ref_retrain_time, sc_.scheduling.lookahead_factor);
          if (cd.decision_t > now_) {
            postponed_to = cd.decision_t;
            break;
          }
        }
        auto pending = pending_tasks();
        if (sc_.policy == Policy::AdaEvo) {
          const bool group_one_busy =
              std::any_of(running_groups_.begin(), running_groups_.end(), [](const auto& kv) { return kv.second == 1; });
          const bool group_one_waiting =
              std::any_of(pending.begin(), pending.end(), [](const auto& t) { return t.group == 1; });
          if (!group_one_busy && !group_one_waiting) {
            scheduler::promote_groups(pending);
            for (const auto& t : pending) active_.at(t.id).task.group = t.group;
          }
          // Groups are served from the most urgent down; each later group
          // only fills memory the earlier ones left unused.
          candidates.clear();
          double left = capacity;
          for (int g = 1; g <= group_count_; ++g) {
            std::vector<scheduler::EvolutionTask> group;
            for (const auto& t : pending) {
              if (t.group == g) group.push_back(t);
            }
            if (group.empty()) continue;
            for (const auto& t : group) candidates.push_back(t.id);
            const auto sel = scheduler::select_tasks(group, left, sc_.scheduling.value_scale, now_);
            admitted.insert(admitted.end(), sel.selected.begin(), sel.selected.end());
            left -= sel.capacity_used;
          }
        } else {
          admitted = scheduler::select_tasks(pending, capacity, sc_.scheduling.value_scale, now_).selected;
        }
        break;
      }
    }

    if (!admitted.empty()) advance_progress();
    for (int id : admitted) admit(id);
    const bool changed = !admitted.empty() || at_completion;
    if (changed && !pool_.running.empty()) reallocate();
    ++decisions_;
    if (opts_.scheduler_wall_seconds) {
      *opts_.scheduler_wall_seconds +=
          std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    }
    if (opts_.decision_log) log_decision(candidates, admitted, capacity, postponed_to);
  }

  void log_decision(const std::vector<int>& candidates, const std::vector<int>& selected, double capacity,
                    std::optional<double> postponed_to) {
    nlohmann::json shares = nlohmann::json::object();
    for (const auto& [id, rt] : pool_.running) shares[std::to_string(id)] = rt.compute_share;
    nlohmann::json line{{"decision_t", now_},     {"policy", std::string(to_string(sc_.policy))},
                        {"candidates", candidates}, {"selected", selected},
                        {"capacity_mb", capacity},  {"shares", shares}};
    if (postponed_to) line["postponed_to"] = *postponed_to;
    *opts_.decision_log << line.dump() << '\n';
  }

  SimMetrics summarize() {
    SimMetrics m;
    m.policy = sc_.policy;
    m.end_time = now_;
    m.decisions = decisions_;
    m.group_count = group_count_;
    std::sort(finished_.begin(), finished_.end(),
              [](const TaskRecord& a, const TaskRecord& b) { return a.task_id < b.task_id; });
    m.tasks = finished_;
    if (m.tasks.empty()) return m;

    std::vector<core::EndQoE> qoes;
    std::vector<double> ts, tr, lengths, evolving;
    for (const auto& t : m.tasks) {
      qoes.push_back({t.end_id, t.urgency, t.qoe});
      ts.push_back(t.cycle.t_schedule);
      tr.push_back(t.cycle.t_retrain);
      lengths.push_back(t.cycle.length());
      evolving.push_back(t.cycle.evolving_time());
    }
    m.qoe = core::penalized_average_qoe(qoes, ts, tr, core::default_penalty_weights(lengths));
    auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    m.mean_t_s = mean(ts);
    m.mean_t_r = mean(tr);
    m.sd_t_s = core::population_sd(ts);
    m.sd_t_r = core::population_sd(tr);
    m.mean_evolving_time = mean(evolving);
    for (const auto& st : ends_) {
      EndSummary es;
      es.end_id = st.spec->id;
      double q = 0.0, u = 0.0, ev = 0.0;
      for (const auto& t : m.tasks) {
        if (t.end_id != es.end_id) continue;
        ++es.cycles;
        q += t.qoe;
        u += t.urgency;
        ev += t.cycle.evolving_time();
      }
      if (es.cycles > 0) {
        const auto n = static_cast<double>(es.cycles);
        es.mean_qoe = q / n;
        es.mean_urgency = u / n;
        es.mean_evolving_time = ev / n;
      }
      m.ends.push_back(es);
    }
    return m;
  }

  const Scenario& sc_;
  RunOptions opts_;
  std::shared_ptr<const profiler::TimeRegressor> regressor_;
  double mem_capacity_ = 0.0;
  double compute_total_ = 0.0;
  double rate_cap_ = 0.0;
  int group_count_ = 0;
  std::vector<double> boundaries_;
  std::vector<EndState> ends_;
  std::map<int, ActiveTask> active_;
  std::vector<int> pending_;
  std::map<int, int> running_groups_;
  std::vector<TaskRecord> finished_;
  scheduler::GpuPool pool_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
  int next_task_id_ = 0;
  std::size_t decisions_ = 0;
  bool arrival_decision_due_ = false;
};

}  // namespace detail

/// Runs one scenario to completion: frames stop at the duration, tasks
/// already requested are carried through deployment.
inline SimMetrics run(const Scenario& scenario, const RunOptions& options = {}) {
  detail::Simulation sim(scenario, options);
  return sim.run();
}

}  // namespace evosched::sim
