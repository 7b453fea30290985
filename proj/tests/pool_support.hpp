#pragma once

// Opens a Pool of any transport. Socket workers are forked from the
// listening callback and run the real worker loop over TCP.

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <memory>
#include <string>
#include <vector>

#include "gcontext/executor.hpp"
#include "gcontext/pipeline.hpp"

namespace support {

class TestPool {
 public:
  TestPool(gcontext::Transport transport, int workers, std::shared_ptr<const gcontext::TaskRegistry> registry = nullptr,
           int cores = 1) {
    gcontext::PoolOptions o;
    o.transport = transport;
    o.workers = workers;
    o.cores_per_worker = cores;
    o.registry = registry;
    o.handshake_timeout = std::chrono::milliseconds(20000);
    auto reg = registry ? registry : gcontext::builtin_task_registry();
    if (transport == gcontext::Transport::socket) {
      o.on_listening = [this, workers, reg](std::uint16_t port) {
        for (int i = 0; i < workers; ++i) {
          pid_t pid = ::fork();
          if (pid == 0) {
            int rc = gcontext::connect_and_run_worker("127.0.0.1:" + std::to_string(port), *reg, i,
                                                      std::chrono::milliseconds(20000));
            _exit(rc);
          }
          children_.push_back(pid);
        }
      };
    }
    pool_ = gcontext::Pool::open(o);
  }
  ~TestPool() {
    pool_.reset();
    for (pid_t pid : children_) {
      int status = 0;
      ::waitpid(pid, &status, 0);
    }
  }
  TestPool(const TestPool&) = delete;
  TestPool& operator=(const TestPool&) = delete;

  gcontext::Pool& operator*() { return *pool_; }
  gcontext::Pool* operator->() { return pool_.get(); }

 private:
  std::vector<pid_t> children_;
  std::unique_ptr<gcontext::Pool> pool_;
};

/// Records of one map must give each chunk exactly one ok record, cover
/// every item once, and never overlap on a worker.
inline std::string check_records(const std::vector<gcontext::TaskRecord>& records,
                                 const std::vector<gcontext::TaskChunk>& chunks) {
  std::vector<int> ok(chunks.size(), 0);
  std::size_t items = 0;
  for (const auto& r : records) {
    if (r.t_start_ns > r.t_end_ns) return "record with t_start > t_end";
    if (r.chunk_id >= chunks.size()) return "record for unknown chunk";
    if (r.status == gcontext::TaskStatus::ok) {
      ++ok[r.chunk_id];
      if (r.item_count != chunks[r.chunk_id].size()) return "item_count differs from chunk size";
      items += r.item_count;
    }
  }
  for (std::size_t c = 0; c < chunks.size(); ++c)
    if (ok[c] != 1) return "chunk " + std::to_string(c) + " has " + std::to_string(ok[c]) + " ok records";
  std::size_t n = 0;
  for (const auto& c : chunks) n += c.size();
  if (items != n) return "item counts do not sum to n";
  for (std::size_t i = 0; i < records.size(); ++i)
    for (std::size_t j = i + 1; j < records.size(); ++j) {
      const auto& a = records[i];
      const auto& b = records[j];
      if (a.worker_id != b.worker_id) continue;
      if (a.t_start_ns < b.t_end_ns && b.t_start_ns < a.t_end_ns) return "overlapping records on one worker";
    }
  return {};
}

/// run_pipeline with socket workers forked from the listening callback
/// (the other transports need no help).
inline gcontext::ExitReport run_pipeline_forked(const gcontext::RunConfig& cfg) {
  std::vector<pid_t> children;
  gcontext::PipelineHooks hooks;
  if (cfg.transport == gcontext::Transport::socket) {
    hooks.on_listening = [&](std::uint16_t port) {
      for (int i = 0; i < cfg.workers; ++i) {
        pid_t pid = ::fork();
        if (pid == 0)
          _exit(gcontext::connect_and_run_worker("127.0.0.1:" + std::to_string(port),
                                                 *gcontext::builtin_task_registry(), i,
                                                 std::chrono::milliseconds(20000)));
        children.push_back(pid);
      }
    };
  }
  auto reap = [&] {
    for (pid_t pid : children) {
      int status = 0;
      ::waitpid(pid, &status, 0);
    }
  };
  try {
    auto report = gcontext::run_pipeline(cfg, hooks);
    reap();
    return report;
  } catch (...) {
    reap();
    throw;
  }
}

}  // namespace support
