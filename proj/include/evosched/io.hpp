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

/// @file io.hpp
/// @brief Serialization of results: metrics CSV, summary and record JSON,
/// and the task-list input of the standalone scheduler.

#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "evosched/drift.hpp"
#include "evosched/profiler.hpp"
#include "evosched/scenario.hpp"
#include "evosched/scheduler.hpp"
#include "evosched/simulator.hpp"

namespace evosched::io {

using nlohmann::json;

namespace detail {

// Seventeen significant digits, enough to read back the same double.
inline std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_metrics_csv(std::ostream& os, const sim::SimMetrics& m) {
  os << "task_id,end_id,drift_type,t1,t_request,t_infer,t_upload,t_schedule,t_retrain,t_download,"
        "evolving_time,avg_accuracy,qoe,urgency,current_accuracy,predicted_gain,group,mem_mb,"
        "predicted_t_r,work,frames\n";
  using detail::exact;
  for (const auto& t : m.tasks) {
    os << t.task_id << ',' << t.end_id << ',' << drift::to_string(t.drift_type) << ',' << exact(t.t1) << ','
       << exact(t.t_request) << ',' << exact(t.cycle.t_infer) << ',' << exact(t.cycle.t_upload) << ','
       << exact(t.cycle.t_schedule) << ',' << exact(t.cycle.t_retrain) << ',' << exact(t.cycle.t_download)
       << ',' << exact(t.cycle.evolving_time()) << ',' << exact(t.cycle.avg_accuracy) << ',' << exact(t.qoe)
       << ',' << exact(t.urgency) << ',' << exact(t.current_accuracy) << ',' << exact(t.predicted_gain) << ','
       << t.group << ',' << exact(t.mem_mb) << ',' << exact(t.predicted_t_r) << ',' << exact(t.work) << ','
       << t.frames << '\n';
  }
}

inline json summary_json(const sim::SimMetrics& m) {
  json ends = json::array();
  for (const auto& e : m.ends) {
    ends.push_back({{"end_id", e.end_id},
                    {"cycles", e.cycles},
                    {"mean_qoe", e.mean_qoe},
                    {"mean_urgency", e.mean_urgency},
                    {"mean_evolving_time", e.mean_evolving_time}});
  }
  return {{"policy", std::string(sim::to_string(m.policy))},
          {"tasks", m.tasks.size()},
          {"group_count", m.group_count},
          {"decisions", m.decisions},
          {"end_time", m.end_time},
          {"q_avg", m.qoe.q_avg},
          {"q_t", m.qoe.q_t},
          {"sd_schedule", m.qoe.sd_schedule},
          {"sd_retrain", m.qoe.sd_retrain},
          {"penalty_weights", {m.qoe.penalty_weights.schedule, m.qoe.penalty_weights.retrain}},
          {"mean_t_s", m.mean_t_s},
          {"sd_t_s", m.sd_t_s},
          {"mean_t_r", m.mean_t_r},
          {"sd_t_r", m.sd_t_r},
          {"mean_evolving_time", m.mean_evolving_time},
          {"ends", ends}};
}

inline json to_json(const drift::DriftEvent& ev) {
  return {{"t1", ev.t1},
          {"t2", ev.t2},
          {"t3", ev.t3},
          {"type", std::string(drift::to_string(ev.drift_type))},
          {"d", ev.d},
          {"d0", ev.d0},
          {"trigger_t", ev.trigger_t},
          {"clc_ref", ev.clc_ref},
          {"clc_new", ev.clc_new}};
}

inline json to_json(const profiler::MemoryBreakdown& mb) {
  const double unit = profiler::kBytesPerMB;
  return {{"m_p", mb.m_p},
          {"m_f", mb.m_f},
          {"m_g", mb.m_g},
          {"m_opt", mb.m_opt},
          {"m_ws", mb.m_ws},
          {"total", mb.total},
          {"total_mb", mb.total / unit}};
}

inline json to_json(const scheduler::SelectionResult& sel) {
  return {{"selected", sel.selected},
          {"total_value", sel.total_value},
          {"capacity_used", sel.capacity_used},
          {"decision_t", sel.decision_t}};
}

/// Task list for standalone selection: `[{"id", "mem_mb", "t_r"}, ...]` or
/// `{"tasks": [...]}`.
inline std::vector<scheduler::EvolutionTask> parse_task_list(std::string_view text) {
  return sim::decode_json_text(text, [](const json& root) {
    const json* list = &root;
    std::string base;
    if (root.is_object()) {
      if (!root.contains("tasks")) throw sim::ScenarioError("/tasks", "missing field");
      list = &root.at("tasks");
      base = "/tasks";
    }
    if (!list->is_array()) throw sim::ScenarioError(base, "expected an array of tasks");
    std::vector<scheduler::EvolutionTask> tasks;
    for (std::size_t i = 0; i < list->size(); ++i) {
      const std::string ptr = base + "/" + std::to_string(i);
      const json& t = list->at(i);
      if (!t.is_object()) throw sim::ScenarioError(ptr, "expected an object");
      for (const char* key : {"id", "mem_mb", "t_r"}) {
        if (!t.contains(key)) throw sim::ScenarioError(ptr + "/" + key, "missing field");
      }
      if (!t.at("id").is_number_integer()) throw sim::ScenarioError(ptr + "/id", "expected an integer");
      for (const char* key : {"mem_mb", "t_r"}) {
        if (!t.at(key).is_number() || !(t.at(key).get<double>() > 0.0)) {
          throw sim::ScenarioError(ptr + "/" + key, "expected a positive number");
        }
      }
      scheduler::EvolutionTask task;
      task.id = t.at("id").get<int>();
      task.mem_demand = t.at("mem_mb").get<double>();
      task.predicted_t_r = t.at("t_r").get<double>();
      if (t.contains("urgency") && t.at("urgency").is_number()) task.urgency = t.at("urgency").get<double>();
      for (const auto& other : tasks) {
        if (other.id == task.id) throw sim::ScenarioError(ptr + "/id", "duplicate task id");
      }
      tasks.push_back(task);
    }
    return tasks;
  });
}

}  // namespace evosched::io
