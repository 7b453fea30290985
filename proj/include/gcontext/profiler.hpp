#pragma once

#include <array>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gcontext/executor.hpp"

namespace gcontext {

/// Fixed step vocabulary of a pipeline run.
inline constexpr std::array<std::string_view, 10> step_vocabulary = {
    "mapping",    "assemblies", "parse_assemblies", "sequences",          "find_families",
    "assign_families", "operons", "taxonomy",       "annotate_functions", "output"};

bool is_step_name(std::string_view name);

struct StepRecord {
  std::string step_name;
  std::int64_t t_start_ns = 0;
  std::int64_t t_end_ns = 0;
  bool parallel = false;
  bool ok = true;
};

struct StepTaskRecord {
  std::string step_name;
  TaskRecord task;
};

/// Collects step timings and the executor's task records for one run.
/// All timestamps come from the steady clock.
class Profiler {
 public:
  void begin_run();
  void end_run();

  /// Times `thunk` as step `name`. The record is closed even when the thunk
  /// throws, with ok = false, and the exception propagates.
  template <class Thunk>
  decltype(auto) record_step(std::string_view name, bool parallel, Thunk&& thunk) {
    open_step(name, parallel);
    try {
      if constexpr (std::is_void_v<decltype(thunk())>) {
        thunk();
        close_step(true);
      } else {
        decltype(auto) result = thunk();
        close_step(true);
        return result;
      }
    } catch (...) {
      close_step(false);
      throw;
    }
  }

  /// Attributes task records to the step currently open.
  void add_tasks(std::span<const TaskRecord> tasks);

  std::int64_t run_start_ns() const noexcept { return run_start_; }
  std::int64_t run_end_ns() const noexcept { return run_end_; }
  const std::vector<StepRecord>& steps() const noexcept { return steps_; }
  const std::vector<StepTaskRecord>& tasks() const noexcept { return tasks_; }

 private:
  void open_step(std::string_view name, bool parallel);
  void close_step(bool ok);

  std::int64_t run_start_ = 0;
  std::int64_t run_end_ = 0;
  std::vector<StepRecord> steps_;
  std::vector<StepTaskRecord> tasks_;
  bool step_open_ = false;
};

/// Pool::map that attributes its task records to the open step, including
/// the records carried by a ParallelMapError.
MapOutput map_and_record(Pool& pool, Profiler& profiler, const std::string& task, const nlohmann::json& items,
                         const nlohmann::json& params, const ChunkingPolicy& policy);

/// profile.json content. Times are integer nanoseconds relative to the run
/// start.
nlohmann::json profile_to_json(const Profiler& profiler);

/// Writes profile.json and gantt.csv under `out_dir`.
void emit_profile(const Profiler& profiler, const std::filesystem::path& out_dir);

/// Nesting and disjointness violations of a profile.json document; empty
/// when the profile is consistent.
std::vector<std::string> check_profile(const nlohmann::json& profile);

/// Plain-text per-step table and per-worker Gantt summary.
std::string render_profile_report(const nlohmann::json& profile, std::size_t width = 60);

}  // namespace gcontext
