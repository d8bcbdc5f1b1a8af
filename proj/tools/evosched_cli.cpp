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

// evosched command line: simulate, drift-detect, profile-memory, schedule,
// gen-traces. Exit codes: 0 success, 2 input error, 3 internal invariant
// violation.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "evosched/evosched.hpp"

namespace fs = std::filesystem;
using namespace evosched;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

/// Raised for bad command-line values; mapped to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string policy;
  std::string sweep;
  bool verbose = false;
  std::string trace;
  std::string arch;
  std::string tasks;
  std::optional<double> capacity;
};

std::string output_dir(const Options& opt) {
  if (!opt.out.empty()) return opt.out;
  if (const char* env = std::getenv("EVOSCHED_OUT"); env && *env) return env;
  return ".";
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("cannot create output directory '" + dir.string() + "'");
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw UsageError("cannot write '" + path.string() + "'");
  os << content;
  if (!os) throw UsageError("write failed for '" + path.string() + "'");
}

void apply_overrides(sim::Scenario& sc, const Options& opt) {
  if (opt.seed) sc.seed = *opt.seed;
  if (!opt.policy.empty()) {
    const auto p = sim::parse_policy(opt.policy);
    if (!p) throw UsageError("unknown policy '" + opt.policy + "'");
    sc.policy = *p;
  }
}

void run_one(const sim::Scenario& sc, const fs::path& dir, bool verbose, const std::string& label) {
  ensure_dir(dir);
  std::ostringstream decisions;
  sim::RunOptions run_opts;
  if (verbose) run_opts.decision_log = &decisions;
  const auto metrics = sim::run(sc, run_opts);

  std::ostringstream csv;
  io::write_metrics_csv(csv, metrics);
  write_file(dir / "metrics.csv", csv.str());
  write_file(dir / "summary.json", io::summary_json(metrics).dump(2) + "\n");
  if (verbose) {
    write_file(dir / "decisions.jsonl", decisions.str());
    std::ostringstream note;
    note << label << sim::to_string(metrics.policy) << ": " << metrics.tasks.size()
         << " tasks, q_t=" << metrics.qoe.q_t << ", mean evolving time=" << metrics.mean_evolving_time
         << " s -> " << dir.string() << '\n';
    std::cerr << note.str();
  }
}

struct Variant {
  std::string name;
  sim::Scenario scenario;
};

// A sweep file is a JSON array of merge patches applied to the base scenario.
// An optional "name" field in each patch names the output subdirectory.
std::vector<Variant> load_sweep(const std::string& base_text, const std::string& sweep_path) {
  const auto base = nlohmann::json::parse(base_text);
  const std::string sweep_text = sim::read_text_file(sweep_path);
  return sim::decode_json_text(sweep_text, [&](const nlohmann::json& root) {
    if (!root.is_array()) throw sim::ScenarioError("", "sweep file must be an array of scenario patches");
    std::vector<Variant> out;
    for (std::size_t i = 0; i < root.size(); ++i) {
      const std::string ptr = "/" + std::to_string(i);
      auto patch = root[i];
      if (!patch.is_object()) throw sim::ScenarioError(ptr, "expected an object");
      Variant v;
      v.name = "variant-" + std::to_string(i);
      if (patch.contains("name")) {
        if (!patch["name"].is_string()) throw sim::ScenarioError(ptr + "/name", "expected a string");
        v.name = patch["name"].get<std::string>();
        if (v.name.empty() || v.name.find_first_of("/\\") != std::string::npos || v.name == "." || v.name == "..") {
          throw sim::ScenarioError(ptr + "/name", "not a usable directory name");
        }
        patch.erase("name");
      }
      auto doc = base;
      doc.merge_patch(patch);
      try {
        v.scenario = sim::scenario_from_json(doc);
      } catch (const sim::ScenarioError& e) {
        throw sim::ScenarioError(ptr + e.pointer(), e.detail());
      }
      for (const auto& prev : out) {
        if (prev.name == v.name) throw sim::ScenarioError(ptr + "/name", "duplicate variant name");
      }
      out.push_back(std::move(v));
    }
    return out;
  });
}

int cmd_simulate(const Options& opt) {
  if (opt.scenario.empty()) throw UsageError("--scenario is required");
  const std::string text = sim::read_text_file(opt.scenario);
  const fs::path out = output_dir(opt);

  if (opt.sweep.empty()) {
    auto sc = sim::parse_scenario(text);
    apply_overrides(sc, opt);
    sim::validate(sc);
    run_one(sc, out, opt.verbose, "");
    return kExitOk;
  }

  auto variants = load_sweep(text, opt.sweep);
  for (auto& v : variants) {
    apply_overrides(v.scenario, opt);
    sim::validate(v.scenario);
  }
  // Variants share nothing but the cached regressor, so they run in parallel.
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(variants.size());
  const auto workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                       static_cast<unsigned>(variants.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < variants.size(); i = next++) {
        try {
          run_one(variants[i].scenario, out / variants[i].name, opt.verbose, variants[i].name + ": ");
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return kExitOk;
}

int cmd_drift_detect(const Options& opt) {
  if (opt.trace.empty()) throw UsageError("--trace is required");
  drift::DetectorConfig cfg;
  if (!opt.scenario.empty()) cfg = sim::load_scenario(opt.scenario).detector;
  std::ifstream in(opt.trace, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + opt.trace + "'");
  const auto frames = sim::read_trace_csv(in);
  drift::DriftDetector detector(cfg);
  std::size_t events = 0;
  for (const auto& f : frames) {
    if (auto ev = detector.update(f)) {
      std::cout << io::to_json(*ev).dump() << '\n';
      ++events;
    }
  }
  if (opt.verbose) std::cerr << frames.size() << " frames, " << events << " drift events\n";
  return kExitOk;
}

int cmd_profile_memory(const Options& opt) {
  if (opt.arch.empty()) throw UsageError("--arch is required");
  const auto arch = sim::parse_arch(sim::read_text_file(opt.arch));
  std::cout << io::to_json(profiler::memory_demand(arch)).dump(2) << '\n';
  return kExitOk;
}

int cmd_schedule(const Options& opt) {
  if (opt.tasks.empty()) throw UsageError("--tasks is required");
  if (!opt.capacity) throw UsageError("--capacity is required");
  if (!(*opt.capacity > 0.0) || !std::isfinite(*opt.capacity)) {
    throw UsageError("--capacity must be a positive number of MB");
  }
  const auto tasks = io::parse_task_list(sim::read_text_file(opt.tasks));
  const auto sel = scheduler::select_tasks(tasks, *opt.capacity);
  std::cout << io::to_json(sel).dump(2) << '\n';
  return kExitOk;
}

int cmd_gen_traces(const Options& opt) {
  if (opt.scenario.empty()) throw UsageError("--scenario is required");
  auto sc = sim::load_scenario(opt.scenario);
  apply_overrides(sc, opt);
  sim::validate(sc);
  const fs::path out = output_dir(opt);
  ensure_dir(out);
  for (const auto& end : sc.ends) {
    const auto frames = sim::gen_trace(end, sc.seed, sc.duration);
    std::ostringstream csv;
    sim::write_trace_csv(csv, frames, end.feature_dim);
    const auto path = out / ("trace_end" + std::to_string(end.id) + ".csv");
    write_file(path, csv.str());
    if (opt.verbose) std::cerr << path.string() << ": " << frames.size() << " frames\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evosched: drift-triggered model evolution and edge GPU scheduling"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_flag("-v,--verbose", opt.verbose, "Report progress on stderr");
  };
  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", opt.seed, "Override the scenario seed");
  };
  auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", opt.out, "Output directory (default: $EVOSCHED_OUT, else .)");
  };

  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write metrics.csv and summary.json");
  simulate->add_option("--scenario", opt.scenario, "Scenario JSON file")->required();
  add_out(simulate);
  add_seed(simulate);
  simulate->add_option("--policy", opt.policy, "Override the policy (AdaEvo, DefaultGpu, SerialFifo, "
                                               "SerialPriority, DpNoGrouping)");
  simulate->add_option("--sweep", opt.sweep, "JSON array of scenario patches, run in parallel");
  add_common(simulate);

  auto* detect = app.add_subcommand("drift-detect", "Print drift events of a trace CSV as JSON lines");
  detect->add_option("--trace", opt.trace, "Trace CSV file")->required();
  detect->add_option("--scenario", opt.scenario, "Take detector settings from this scenario");
  add_common(detect);

  auto* memory = app.add_subcommand("profile-memory", "Print the retraining memory breakdown of an architecture");
  memory->add_option("--arch", opt.arch, "Architecture JSON file")->required();
  add_common(memory);

  auto* schedule = app.add_subcommand("schedule", "Select tasks for a memory budget");
  schedule->add_option("--tasks", opt.tasks, "Task list JSON file")->required();
  schedule->add_option("--capacity", opt.capacity, "Free GPU memory in MB")->required();
  add_common(schedule);

  auto* traces = app.add_subcommand("gen-traces", "Write one synthetic trace CSV per end");
  traces->add_option("--scenario", opt.scenario, "Scenario JSON file")->required();
  add_out(traces);
  add_seed(traces);
  add_common(traces);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opt);
    if (detect->parsed()) return cmd_drift_detect(opt);
    if (memory->parsed()) return cmd_profile_memory(opt);
    if (schedule->parsed()) return cmd_schedule(opt);
    if (traces->parsed()) return cmd_gen_traces(opt);
  } catch (const sim::InvariantError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const sim::ScenarioError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const sim::TraceFormatError& e) {
    std::cerr << "error: " << opt.trace << ": " << e.what() << '\n';
    return kExitInput;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInput;
}
