#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gcontext/error.hpp"

namespace gcontext {

// Coordinator/worker futures pool. The coordinator splits an item list into
// chunks, deals them to workers and reassembles results in input order.
// Tasks are named entries of a TaskRegistry so the same code runs in
// threads, forked processes, or remote workers speaking the wire protocol.

enum class Transport { inprocess, multiprocess, socket };
std::string_view to_string(Transport transport);
Transport parse_transport(std::string_view text);

enum class ChunkingMode { static_chunks, dynamic_chunks };
std::string_view to_string(ChunkingMode mode);
ChunkingMode parse_chunking_mode(std::string_view text);

struct ChunkingPolicy {
  ChunkingMode mode = ChunkingMode::static_chunks;
  std::size_t dynamic_chunk_size = 1;  // dynamic only, >= 1
};

/// Contiguous slice [begin, end) of the submitted items.
struct TaskChunk {
  std::size_t chunk_id = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const TaskChunk&, const TaskChunk&) = default;
};

/// min(n_workers, n_items) contiguous chunk sizes differing by at most one,
/// larger chunks first.
std::vector<std::size_t> split_static(std::size_t n_items, std::size_t n_workers);

/// Static: one chunk per worker. Dynamic: ceil(n / chunk_size) chunks.
std::vector<TaskChunk> make_chunks(std::size_t n_items, std::size_t n_workers, const ChunkingPolicy& policy);

enum class TaskStatus { ok, failed };

struct TaskRecord {
  int worker_id = 0;
  std::size_t chunk_id = 0;
  std::int64_t t_start_ns = 0;  // steady clock
  std::int64_t t_end_ns = 0;
  std::size_t item_count = 0;
  TaskStatus status = TaskStatus::ok;
  friend bool operator==(const TaskRecord&, const TaskRecord&) = default;
};

nlohmann::json to_json(const TaskRecord& record);
TaskRecord task_record_from_json(const nlohmann::json& j);

/// Monotonic nanoseconds; comparable across processes on one host.
std::int64_t monotonic_ns();

/// Per-worker state handed to every task invocation. Lives as long as the
/// worker, so tasks can keep caches (open stores, parsed files) in it.
class WorkerContext {
 public:
  WorkerContext(int worker_id, int cores) : worker_id_(worker_id), cores_(cores) {}

  int worker_id() const noexcept { return worker_id_; }
  int cores() const noexcept { return cores_; }
  bool in_process() const noexcept { return in_process_; }
  void set_in_process(bool v) noexcept { in_process_ = v; }

  template <class T, class Factory>
  T& cached(const std::string& key, Factory&& make) {
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      auto value = std::make_shared<T>(make());
      it = cache_.emplace(key, std::move(value)).first;
    }
    return *static_cast<T*>(it->second.get());
  }

 private:
  int worker_id_;
  int cores_;
  bool in_process_ = false;
  std::map<std::string, std::shared_ptr<void>> cache_;
};

/// A task maps a JSON array of items to a JSON array of results of the
/// same length. It must be deterministic and must not share mutable state.
using TaskFn = std::function<nlohmann::json(const nlohmann::json& items, const nlohmann::json& params,
                                            WorkerContext& context)>;

class TaskRegistry {
 public:
  void add(std::string name, TaskFn fn);
  const TaskFn* find(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, TaskFn, std::less<>> tasks_;
};

/// Registry with every task the pipeline and the bench command use.
std::shared_ptr<const TaskRegistry> builtin_task_registry();

struct PoolOptions {
  Transport transport = Transport::inprocess;
  int workers = 1;
  int cores_per_worker = 1;
  std::string listen = "127.0.0.1:0";  // socket transport
  std::chrono::milliseconds handshake_timeout{30000};
  /// Socket transport: called with the bound port before accepting.
  std::function<void(std::uint16_t port)> on_listening;
  /// Null selects builtin_task_registry().
  std::shared_ptr<const TaskRegistry> registry;
};

class HandshakeError : public Error {
 public:
  using Error::Error;
};

class ParallelMapError : public Error {
 public:
  ParallelMapError(const std::string& what, std::size_t chunk_id, std::vector<TaskRecord> records)
      : Error(what), chunk_id_(chunk_id), records_(std::move(records)) {}

  std::size_t chunk_id() const noexcept { return chunk_id_; }
  const std::vector<TaskRecord>& records() const noexcept { return records_; }

 private:
  std::size_t chunk_id_;
  std::vector<TaskRecord> records_;
};

struct MapOutput {
  nlohmann::json results = nlohmann::json::array();
  std::vector<TaskRecord> records;
};

class Pool {
 public:
  /// Acquires every worker up front; returns once all of them finished the
  /// handshake. Throws HandshakeError on timeout or version mismatch.
  static std::unique_ptr<Pool> open(const PoolOptions& options);

  ~Pool();
  Pool(const Pool&) = delete;
  Pool& operator=(const Pool&) = delete;

  int size() const noexcept;
  int live_workers() const noexcept;
  int cores_per_worker() const noexcept { return options_.cores_per_worker; }
  Transport transport() const noexcept { return options_.transport; }
  /// Bound port of the socket transport, 0 otherwise.
  std::uint16_t port() const noexcept { return port_; }

  /// Runs `task` over `items` (a JSON array). Results come back in input
  /// order with one TaskRecord per chunk attempt. A failed chunk is retried
  /// once on another worker; a second failure raises ParallelMapError.
  MapOutput map(const std::string& task, const nlohmann::json& items, const nlohmann::json& params,
                const ChunkingPolicy& policy);

  class Backend;

 private:
  Pool(PoolOptions options, std::unique_ptr<Backend> backend, std::uint16_t port);

  PoolOptions options_;
  std::unique_ptr<Backend> backend_;
  std::uint16_t port_ = 0;
};

template <class Out, class In>
std::vector<Out> parallel_map(Pool& pool, const std::string& task, const std::vector<In>& items,
                              const ChunkingPolicy& policy, const nlohmann::json& params = nlohmann::json::object(),
                              std::vector<TaskRecord>* records = nullptr) {
  nlohmann::json array = nlohmann::json::array();
  for (const auto& item : items) array.push_back(item);
  auto out = pool.map(task, array, params, policy);
  if (records) records->insert(records->end(), out.records.begin(), out.records.end());
  std::vector<Out> results;
  results.reserve(out.results.size());
  for (const auto& r : out.results) results.push_back(r.template get<Out>());
  return results;
}

/// Runs one TASK body against `registry`. Returns the RESULT or ERROR
/// body; `ok` reports which one.
nlohmann::json execute_task(const TaskRegistry& registry, const nlohmann::json& task_body, WorkerContext& context,
                            bool& ok);

/// Worker side of the stream transports: HELLO, then TASK/RESULT until
/// SHUTDOWN. Returns a process exit code.
int run_worker(int fd, const TaskRegistry& registry, std::optional<int> requested_id,
               std::chrono::milliseconds handshake_timeout = std::chrono::milliseconds{30000});

/// Connects to a coordinator at "host:port" (retrying until the timeout)
/// and runs the worker loop.
int connect_and_run_worker(const std::string& host_port, const TaskRegistry& registry,
                           std::optional<int> requested_id, std::chrono::milliseconds timeout);

}  // namespace gcontext
