#include "gcontext/profiler.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "gcontext/io.hpp"

namespace gcontext {

using nlohmann::json;

bool is_step_name(std::string_view name) {
  return std::find(step_vocabulary.begin(), step_vocabulary.end(), name) != step_vocabulary.end();
}

void Profiler::begin_run() {
  steps_.clear();
  tasks_.clear();
  run_start_ = monotonic_ns();
  run_end_ = run_start_;
}

void Profiler::end_run() { run_end_ = monotonic_ns(); }

void Profiler::open_step(std::string_view name, bool parallel) {
  if (!is_step_name(name)) throw UsageError("unknown step name '" + std::string(name) + "'");
  if (step_open_) throw Error("step '" + std::string(name) + "' opened inside another step");
  for (const auto& s : steps_)
    if (s.step_name == name) throw Error("step '" + std::string(name) + "' recorded twice");
  steps_.push_back({std::string(name), monotonic_ns(), 0, parallel, true});
  step_open_ = true;
}

void Profiler::close_step(bool ok) {
  auto& s = steps_.back();
  s.t_end_ns = monotonic_ns();
  s.ok = ok;
  step_open_ = false;
}

void Profiler::add_tasks(std::span<const TaskRecord> tasks) {
  const std::string step = step_open_ ? steps_.back().step_name : std::string("unattributed");
  for (const auto& t : tasks) tasks_.push_back({step, t});
}

MapOutput map_and_record(Pool& pool, Profiler& profiler, const std::string& task, const json& items,
                         const json& params, const ChunkingPolicy& policy) {
  try {
    auto out = pool.map(task, items, params, policy);
    profiler.add_tasks(out.records);
    return out;
  } catch (const ParallelMapError& e) {
    profiler.add_tasks(e.records());
    throw;
  }
}

json profile_to_json(const Profiler& p) {
  const auto t0 = p.run_start_ns();
  json steps = json::array();
  for (const auto& s : p.steps()) {
    steps.push_back({{"name", s.step_name},
                     {"t_start_ns", s.t_start_ns - t0},
                     {"t_end_ns", s.t_end_ns - t0},
                     {"duration_ns", s.t_end_ns - s.t_start_ns},
                     {"parallel", s.parallel},
                     {"status", s.ok ? "ok" : "failed"}});
  }
  std::map<int, json> per_worker;
  json tasks = json::array();
  for (const auto& t : p.tasks()) {
    json row = {{"worker_id", t.task.worker_id},
                {"chunk_id", t.task.chunk_id},
                {"step", t.step_name},
                {"t_start_ns", t.task.t_start_ns - t0},
                {"t_end_ns", t.task.t_end_ns - t0},
                {"item_count", t.task.item_count},
                {"status", t.task.status == TaskStatus::ok ? "ok" : "failed"}};
    tasks.push_back(row);
    per_worker[t.task.worker_id].push_back({{"step", t.step_name},
                                            {"chunk_id", t.task.chunk_id},
                                            {"t_start_ns", t.task.t_start_ns - t0},
                                            {"t_end_ns", t.task.t_end_ns - t0}});
  }
  json workers = json::object();
  for (auto& [w, list] : per_worker) workers[std::to_string(w)] = std::move(list);
  return json{{"format_version", 1},
              {"clock", "steady"},
              {"run", {{"t_start_ns", 0}, {"t_end_ns", p.run_end_ns() - t0}, {"duration_ns", p.run_end_ns() - t0}}},
              {"steps", std::move(steps)},
              {"tasks", std::move(tasks)},
              {"workers", std::move(workers)}};
}

void emit_profile(const Profiler& p, const std::filesystem::path& out_dir) {
  auto j = profile_to_json(p);
  write_text_file(out_dir / "profile.json", j.dump(1) + "\n");
  std::ostringstream csv;
  csv << "worker_id,chunk_id,step,t_start_ns,t_end_ns,item_count,status\n";
  for (const auto& t : j["tasks"]) {
    csv << t["worker_id"].get<int>() << ',' << t["chunk_id"].get<std::size_t>() << ','
        << t["step"].get<std::string>() << ',' << t["t_start_ns"].get<std::int64_t>() << ','
        << t["t_end_ns"].get<std::int64_t>() << ',' << t["item_count"].get<std::size_t>() << ','
        << t["status"].get<std::string>() << '\n';
  }
  write_text_file(out_dir / "gantt.csv", csv.str());
}

std::vector<std::string> check_profile(const json& profile) {
  std::vector<std::string> problems;
  const auto run_start = profile.at("run").at("t_start_ns").get<std::int64_t>();
  const auto run_end = profile.at("run").at("t_end_ns").get<std::int64_t>();
  if (run_start > run_end) problems.push_back("run interval reversed");
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> steps;
  for (const auto& s : profile.at("steps")) {
    auto name = s.at("name").get<std::string>();
    auto a = s.at("t_start_ns").get<std::int64_t>();
    auto b = s.at("t_end_ns").get<std::int64_t>();
    if (a > b) problems.push_back("step " + name + " reversed");
    if (a < run_start || b > run_end) problems.push_back("step " + name + " outside run interval");
    if (!steps.emplace(name, std::make_pair(a, b)).second) problems.push_back("step " + name + " repeated");
  }
  std::map<int, std::vector<std::pair<std::int64_t, std::int64_t>>> per_worker;
  for (const auto& t : profile.at("tasks")) {
    auto step = t.at("step").get<std::string>();
    auto a = t.at("t_start_ns").get<std::int64_t>();
    auto b = t.at("t_end_ns").get<std::int64_t>();
    auto label = "task (worker " + std::to_string(t.at("worker_id").get<int>()) + ", chunk " +
                 std::to_string(t.at("chunk_id").get<std::size_t>()) + ", step " + step + ")";
    if (a > b) problems.push_back(label + " reversed");
    auto it = steps.find(step);
    if (it == steps.end())
      problems.push_back(label + " has no step");
    else if (a < it->second.first || b > it->second.second)
      problems.push_back(label + " outside its step interval");
    per_worker[t.at("worker_id").get<int>()].emplace_back(a, b);
  }
  for (auto& [w, list] : per_worker) {
    std::sort(list.begin(), list.end());
    for (std::size_t i = 1; i < list.size(); ++i)
      if (list[i].first < list[i - 1].second)
        problems.push_back("worker " + std::to_string(w) + " has overlapping task intervals");
  }
  return problems;
}

std::string render_profile_report(const json& profile, std::size_t width) {
  std::ostringstream os;
  const auto run_ns = std::max<std::int64_t>(1, profile.at("run").at("duration_ns").get<std::int64_t>());
  auto seconds = [](std::int64_t ns) { return format_fixed(static_cast<double>(ns) / 1e9); };
  os << "run duration: " << seconds(run_ns) << " s\n\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %14s %8s %9s %8s\n", "step", "duration_s", "share", "parallel", "status");
  os << line;
  for (const auto& s : profile.at("steps")) {
    auto d = s.at("duration_ns").get<std::int64_t>();
    std::snprintf(line, sizeof line, "%-20s %14s %7.1f%% %9s %8s\n", s.at("name").get<std::string>().c_str(),
                  seconds(d).c_str(), 100.0 * static_cast<double>(d) / static_cast<double>(run_ns),
                  s.at("parallel").get<bool>() ? "yes" : "no", s.at("status").get<std::string>().c_str());
    os << line;
  }
  const auto& workers = profile.at("workers");
  if (workers.empty()) {
    os << "\n(no distributed tasks recorded)\n";
    return os.str();
  }
  os << "\nworker timeline ('#' busy, '.' idle; " << width << " columns span the run)\n";
  for (const auto& [id, tasks] : workers.items()) {
    std::string bar(width, '.');
    std::int64_t busy = 0;
    for (const auto& t : tasks) {
      auto a = t.at("t_start_ns").get<std::int64_t>();
      auto b = t.at("t_end_ns").get<std::int64_t>();
      busy += b - a;
      auto ca = static_cast<std::size_t>(static_cast<double>(a) / static_cast<double>(run_ns) * width);
      auto cb = static_cast<std::size_t>(static_cast<double>(b) / static_cast<double>(run_ns) * width);
      for (auto c = ca; c <= std::min(cb, width - 1); ++c) bar[c] = '#';
    }
    std::snprintf(line, sizeof line, "w%-4s |%s| busy %s s, %zu chunks\n", id.c_str(), bar.c_str(),
                  seconds(busy).c_str(), tasks.size());
    os << line;
  }
  return os.str();
}

}  // namespace gcontext
