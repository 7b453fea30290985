#include "gcontext/executor.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <set>
#include <thread>

#include "gcontext/log.hpp"
#include "gcontext/wire.hpp"

namespace gcontext {

using nlohmann::json;
using namespace std::chrono_literals;

std::string_view to_string(Transport t) {
  switch (t) {
    case Transport::inprocess: return "inprocess";
    case Transport::multiprocess: return "multiprocess";
    case Transport::socket: return "socket";
  }
  return "?";
}

Transport parse_transport(std::string_view text) {
  for (auto t : {Transport::inprocess, Transport::multiprocess, Transport::socket})
    if (to_string(t) == text) return t;
  throw UsageError("transport: expected inprocess|multiprocess|socket, got '" + std::string(text) + "'");
}

std::string_view to_string(ChunkingMode m) { return m == ChunkingMode::static_chunks ? "static" : "dynamic"; }

ChunkingMode parse_chunking_mode(std::string_view text) {
  if (text == "static") return ChunkingMode::static_chunks;
  if (text == "dynamic") return ChunkingMode::dynamic_chunks;
  throw UsageError("chunking: expected static|dynamic, got '" + std::string(text) + "'");
}

std::vector<std::size_t> split_static(std::size_t n_items, std::size_t n_workers) {
  if (n_workers == 0) throw UsageError("split_static: n_workers must be >= 1");
  std::vector<std::size_t> sizes;
  const auto k = std::min(n_items, n_workers);
  if (k == 0) return sizes;
  const auto base = n_items / k;
  const auto extra = n_items % k;
  for (std::size_t i = 0; i < k; ++i) sizes.push_back(base + (i < extra ? 1 : 0));
  return sizes;
}

std::vector<TaskChunk> make_chunks(std::size_t n_items, std::size_t n_workers, const ChunkingPolicy& policy) {
  std::vector<TaskChunk> chunks;
  if (policy.mode == ChunkingMode::static_chunks) {
    std::size_t begin = 0;
    for (auto s : split_static(n_items, n_workers)) {
      chunks.push_back({chunks.size(), begin, begin + s});
      begin += s;
    }
    return chunks;
  }
  if (policy.dynamic_chunk_size == 0) throw UsageError("dynamic chunk size must be >= 1");
  for (std::size_t begin = 0; begin < n_items; begin += policy.dynamic_chunk_size)
    chunks.push_back({chunks.size(), begin, std::min(n_items, begin + policy.dynamic_chunk_size)});
  return chunks;
}

json to_json(const TaskRecord& r) {
  return json{{"worker_id", r.worker_id},   {"chunk_id", r.chunk_id},     {"t_start_ns", r.t_start_ns},
              {"t_end_ns", r.t_end_ns},     {"item_count", r.item_count},
              {"status", r.status == TaskStatus::ok ? "ok" : "failed"}};
}

TaskRecord task_record_from_json(const json& j) {
  TaskRecord r;
  r.worker_id = j.at("worker_id").get<int>();
  r.chunk_id = j.at("chunk_id").get<std::size_t>();
  r.t_start_ns = j.at("t_start_ns").get<std::int64_t>();
  r.t_end_ns = j.at("t_end_ns").get<std::int64_t>();
  r.item_count = j.at("item_count").get<std::size_t>();
  r.status = j.at("status").get<std::string>() == "ok" ? TaskStatus::ok : TaskStatus::failed;
  return r;
}

std::int64_t monotonic_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void TaskRegistry::add(std::string name, TaskFn fn) { tasks_[std::move(name)] = std::move(fn); }

const TaskFn* TaskRegistry::find(std::string_view name) const {
  auto it = tasks_.find(name);
  return it == tasks_.end() ? nullptr : &it->second;
}

std::vector<std::string> TaskRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : tasks_) out.push_back(k);
  return out;
}

json execute_task(const TaskRegistry& registry, const json& body, WorkerContext& context, bool& ok) {
  TaskRecord rec;
  rec.worker_id = context.worker_id();
  rec.chunk_id = body.value("chunk_id", std::size_t{0});
  rec.t_start_ns = monotonic_ns();
  try {
    const auto& items = body.at("items");
    rec.item_count = items.size();
    auto name = body.at("task").get<std::string>();
    const TaskFn* fn = registry.find(name);
    if (fn == nullptr) throw Error("unknown task '" + name + "'");
    static const json empty = json::object();
    auto it = body.find("params");
    json results = (*fn)(items, it == body.end() ? empty : *it, context);
    if (!results.is_array() || results.size() != items.size())
      throw Error("task '" + name + "' returned " + std::to_string(results.is_array() ? results.size() : 0) +
                  " results for " + std::to_string(items.size()) + " items");
    rec.t_end_ns = monotonic_ns();
    ok = true;
    return json{{"chunk_id", rec.chunk_id}, {"results", std::move(results)}, {"record", to_json(rec)}};
  } catch (const std::exception& e) {
    rec.t_end_ns = monotonic_ns();
    rec.status = TaskStatus::failed;
    ok = false;
    return json{{"chunk_id", rec.chunk_id}, {"error", e.what()}, {"record", to_json(rec)}};
  }
}

// ---------------------------------------------------------------- backends

namespace {

struct Event {
  enum class Kind { result, error, crash };
  int worker = 0;
  Kind kind = Kind::result;
  json body;
  std::string message;
};

}  // namespace

class Pool::Backend {
 public:
  virtual ~Backend() = default;
  virtual int size() const = 0;
  virtual bool alive(int worker) const = 0;
  virtual void dispatch(int worker, const json& task_body) = 0;
  virtual Event wait() = 0;
  virtual void shutdown() noexcept = 0;
};

namespace {

class InprocessBackend final : public Pool::Backend {
 public:
  InprocessBackend(int workers, int cores, std::shared_ptr<const TaskRegistry> registry)
      : registry_(std::move(registry)) {
    for (int i = 0; i < workers; ++i) slots_.push_back(std::make_unique<Slot>());
    for (int i = 0; i < workers; ++i) slots_[i]->thread = std::thread([this, i, cores] { loop(i, cores); });
  }
  ~InprocessBackend() override { shutdown(); }

  int size() const override { return static_cast<int>(slots_.size()); }
  bool alive(int) const override { return true; }

  void dispatch(int worker, const json& body) override {
    auto& s = *slots_[worker];
    {
      std::lock_guard lock(s.m);
      s.task = body;
    }
    s.cv.notify_one();
  }

  Event wait() override {
    std::unique_lock lock(events_m_);
    events_cv_.wait(lock, [&] { return !events_.empty(); });
    Event e = std::move(events_.front());
    events_.pop_front();
    return e;
  }

  void shutdown() noexcept override {
    for (auto& s : slots_) {
      {
        std::lock_guard lock(s->m);
        s->stop = true;
      }
      s->cv.notify_one();
    }
    for (auto& s : slots_)
      if (s->thread.joinable()) s->thread.join();
  }

 private:
  struct Slot {
    std::mutex m;
    std::condition_variable cv;
    std::optional<json> task;
    bool stop = false;
    std::thread thread;
  };

  void loop(int worker, int cores) {
    WorkerContext context(worker, cores);
    context.set_in_process(true);
    auto& s = *slots_[worker];
    for (;;) {
      json body;
      {
        std::unique_lock lock(s.m);
        s.cv.wait(lock, [&] { return s.stop || s.task.has_value(); });
        if (!s.task) return;
        body = std::move(*s.task);
        s.task.reset();
      }
      bool ok = false;
      auto out = execute_task(*registry_, body, context, ok);
      std::string message = ok ? std::string() : out.value("error", std::string("worker error"));
      {
        std::lock_guard lock(events_m_);
        events_.push_back(
            Event{worker, ok ? Event::Kind::result : Event::Kind::error, std::move(out), std::move(message)});
      }
      events_cv_.notify_one();
    }
  }

  std::shared_ptr<const TaskRegistry> registry_;
  std::vector<std::unique_ptr<Slot>> slots_;
  std::mutex events_m_;
  std::condition_variable events_cv_;
  std::deque<Event> events_;
};

class StreamBackend final : public Pool::Backend {
 public:
  struct Worker {
    int fd = -1;
    pid_t pid = -1;
    bool alive = true;
    bool busy = false;
  };

  explicit StreamBackend(std::vector<Worker> workers) : workers_(std::move(workers)) {}
  ~StreamBackend() override { shutdown(); }

  int size() const override { return static_cast<int>(workers_.size()); }
  bool alive(int w) const override { return workers_[w].alive; }

  void dispatch(int w, const json& body) override {
    auto& worker = workers_[w];
    worker.busy = true;
    try {
      wire::send_frame(worker.fd, wire::FrameType::task, body);
    } catch (const std::exception& e) {
      pending_.push_back(lost(w, std::string("send failed: ") + e.what()));
    }
  }

  Event wait() override {
    if (!pending_.empty()) {
      Event e = std::move(pending_.front());
      pending_.pop_front();
      return e;
    }
    for (;;) {
      std::vector<pollfd> fds;
      std::vector<int> index;
      for (int i = 0; i < size(); ++i) {
        if (workers_[i].alive && workers_[i].busy) {
          fds.push_back({workers_[i].fd, POLLIN, 0});
          index.push_back(i);
        }
      }
      if (fds.empty()) throw Error("executor: waiting with no chunk in flight");
      int rc = ::poll(fds.data(), fds.size(), -1);
      if (rc < 0 && errno == EINTR) continue;
      if (rc < 0) throw Error(std::string("poll: ") + std::strerror(errno));
      for (std::size_t k = 0; k < fds.size(); ++k) {
        if (fds[k].revents == 0) continue;
        const int w = index[k];
        try {
          auto frame = wire::receive_frame(workers_[w].fd, std::chrono::milliseconds{60000});
          if (!frame) return lost(w, "worker closed the connection");
          workers_[w].busy = false;
          if (frame->type == wire::FrameType::result) return Event{w, Event::Kind::result, std::move(frame->body), {}};
          if (frame->type == wire::FrameType::error) {
            auto msg = frame->body.value("error", std::string("worker error"));
            return Event{w, Event::Kind::error, std::move(frame->body), msg};
          }
          return lost(w, "unexpected " + std::string(wire::to_string(frame->type)) + " frame");
        } catch (const std::exception& e) {
          return lost(w, e.what());
        }
      }
    }
  }

  void shutdown() noexcept override {
    for (auto& w : workers_) {
      if (w.fd >= 0) {
        if (w.alive) {
          try {
            wire::send_frame(w.fd, wire::FrameType::shutdown, json::object());
          } catch (...) {
          }
        }
        ::close(w.fd);
        w.fd = -1;
      }
      w.alive = false;
    }
    for (auto& w : workers_) reap(w);
  }

 private:
  Event lost(int w, std::string message) {
    auto& worker = workers_[w];
    worker.alive = false;
    worker.busy = false;
    if (worker.fd >= 0) ::close(worker.fd);
    worker.fd = -1;
    log_warn("worker ", w, " lost: ", message);
    reap(worker);
    return Event{w, Event::Kind::crash, json(), std::move(message)};
  }

  static void reap(Worker& w) noexcept {
    if (w.pid <= 0) return;
    for (int i = 0; i < 200; ++i) {
      int status = 0;
      pid_t r = ::waitpid(w.pid, &status, WNOHANG);
      if (r == w.pid || (r < 0 && errno == ECHILD)) {
        w.pid = -1;
        return;
      }
      std::this_thread::sleep_for(10ms);
    }
    ::kill(w.pid, SIGKILL);
    ::waitpid(w.pid, nullptr, 0);
    w.pid = -1;
  }

  std::vector<Worker> workers_;
  std::deque<Event> pending_;
};

std::pair<std::string, std::string> split_host_port(const std::string& host_port) {
  auto colon = host_port.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == host_port.size())
    throw UsageError("expected host:port, got '" + host_port + "'");
  return {host_port.substr(0, colon), host_port.substr(colon + 1)};
}

sockaddr_in resolve_ipv4(const std::string& host_port) {
  auto [host, port] = split_host_port(host_port);
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0)
    throw UsageError("cannot resolve '" + host_port + "': " + gai_strerror(rc));
  sockaddr_in addr{};
  std::memcpy(&addr, res->ai_addr, sizeof addr);
  ::freeaddrinfo(res);
  return addr;
}

std::chrono::milliseconds remaining(std::chrono::steady_clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
  return std::max(left, 0ms);
}

// Coordinator half of the handshake. Returns the worker id granted.
int accept_hello(int fd, std::set<int>& used, int n_workers, std::optional<int> forced_id, int cores,
                 std::chrono::milliseconds timeout) {
  std::optional<wire::Frame> hello;
  try {
    hello = wire::receive_frame(fd, timeout);
  } catch (const wire::ProtocolError& e) {
    throw HandshakeError(std::string("handshake failed: ") + e.what());
  }
  if (!hello || hello->type != wire::FrameType::hello) throw HandshakeError("handshake failed: expected HELLO");
  const auto version = hello->body.value("protocol_version", -1);
  if (version != wire::protocol_version) {
    try {
      wire::send_frame(fd, wire::FrameType::error,
                       {{"error", "protocol version mismatch"},
                        {"expected", wire::protocol_version},
                        {"received", version}});
    } catch (...) {
    }
    throw HandshakeError("worker protocol version " + std::to_string(version) + " rejected (coordinator speaks " +
                         std::to_string(wire::protocol_version) + ")");
  }
  int id = forced_id.value_or(-1);
  if (!forced_id) {
    int requested = hello->body.value("worker_id", -1);
    if (requested >= 0 && requested < n_workers && !used.count(requested)) {
      id = requested;
    } else {
      for (id = 0; used.count(id); ++id) {
      }
    }
  }
  used.insert(id);
  wire::send_frame(fd, wire::FrameType::hello,
                   {{"protocol_version", wire::protocol_version}, {"worker_id", id}, {"cores_per_worker", cores}});
  return id;
}

std::unique_ptr<Pool::Backend> spawn_processes(const PoolOptions& o, const std::shared_ptr<const TaskRegistry>& reg) {
  std::vector<StreamBackend::Worker> workers;
  auto cleanup = [&] {
    for (auto& w : workers) {
      if (w.fd >= 0) ::close(w.fd);
      if (w.pid > 0) {
        ::kill(w.pid, SIGKILL);
        ::waitpid(w.pid, nullptr, 0);
      }
    }
  };
  std::fflush(nullptr);
  for (int i = 0; i < o.workers; ++i) {
    int sv[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, sv) != 0) {
      cleanup();
      throw Error(std::string("socketpair: ") + std::strerror(errno));
    }
    pid_t pid = ::fork();
    if (pid < 0) {
      ::close(sv[0]);
      ::close(sv[1]);
      cleanup();
      throw Error(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
      for (auto& w : workers) ::close(w.fd);
      ::close(sv[0]);
      int rc = run_worker(sv[1], *reg, i, o.handshake_timeout);
      ::close(sv[1]);
      ::_exit(rc);
    }
    ::close(sv[1]);
    workers.push_back({sv[0], pid, true, false});
  }
  std::set<int> used;
  auto deadline = std::chrono::steady_clock::now() + o.handshake_timeout;
  try {
    for (int i = 0; i < o.workers; ++i)
      accept_hello(workers[i].fd, used, o.workers, i, o.cores_per_worker, remaining(deadline));
  } catch (...) {
    cleanup();
    throw;
  }
  return std::make_unique<StreamBackend>(std::move(workers));
}

std::unique_ptr<Pool::Backend> listen_for_workers(const PoolOptions& o, std::uint16_t& port_out) {
  auto addr = resolve_ipv4(o.listen);
  int lfd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (lfd < 0) throw Error(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(lfd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(lfd, o.workers + 8) != 0) {
    std::string msg = std::strerror(errno);
    ::close(lfd);
    throw Error("cannot listen on " + o.listen + ": " + msg);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(lfd, reinterpret_cast<sockaddr*>(&bound), &len);
  port_out = ntohs(bound.sin_port);
  log_info("coordinator listening on port ", port_out, " for ", o.workers, " workers");

  std::vector<StreamBackend::Worker> workers(o.workers);
  auto cleanup = [&] {
    ::close(lfd);
    for (auto& w : workers)
      if (w.fd >= 0) ::close(w.fd);
  };
  try {
    if (o.on_listening) o.on_listening(port_out);
    std::set<int> used;
    auto deadline = std::chrono::steady_clock::now() + o.handshake_timeout;
    for (int accepted = 0; accepted < o.workers;) {
      pollfd p{lfd, POLLIN, 0};
      auto left = remaining(deadline);
      int rc = ::poll(&p, 1, static_cast<int>(left.count()));
      if (rc < 0 && errno == EINTR) continue;
      if (rc <= 0)
        throw HandshakeError("handshake timeout: " + std::to_string(accepted) + " of " + std::to_string(o.workers) +
                             " workers connected");
      int fd = ::accept4(lfd, nullptr, nullptr, SOCK_CLOEXEC);
      if (fd < 0) continue;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      int id = 0;
      try {
        id = accept_hello(fd, used, o.workers, std::nullopt, o.cores_per_worker, remaining(deadline));
      } catch (...) {
        ::close(fd);
        throw;
      }
      workers[id].fd = fd;
      ++accepted;
    }
  } catch (...) {
    cleanup();
    throw;
  }
  ::close(lfd);
  return std::make_unique<StreamBackend>(std::move(workers));
}

}  // namespace

// -------------------------------------------------------------------- pool

Pool::Pool(PoolOptions options, std::unique_ptr<Backend> backend, std::uint16_t port)
    : options_(std::move(options)), backend_(std::move(backend)), port_(port) {}

Pool::~Pool() {
  if (backend_) backend_->shutdown();
}

int Pool::size() const noexcept { return backend_->size(); }

int Pool::live_workers() const noexcept {
  int n = 0;
  for (int i = 0; i < backend_->size(); ++i) n += backend_->alive(i) ? 1 : 0;
  return n;
}

std::unique_ptr<Pool> Pool::open(const PoolOptions& options) {
  if (options.workers < 1) throw UsageError("workers must be >= 1");
  if (options.cores_per_worker < 1) throw UsageError("cores-per-worker must be >= 1");
  PoolOptions o = options;
  if (!o.registry) o.registry = builtin_task_registry();
  std::uint16_t port = 0;
  std::unique_ptr<Backend> backend;
  switch (o.transport) {
    case Transport::inprocess:
      backend = std::make_unique<InprocessBackend>(o.workers, o.cores_per_worker, o.registry);
      break;
    case Transport::multiprocess: backend = spawn_processes(o, o.registry); break;
    case Transport::socket: backend = listen_for_workers(o, port); break;
  }
  return std::unique_ptr<Pool>(new Pool(std::move(o), std::move(backend), port));
}

MapOutput Pool::map(const std::string& task, const json& items, const json& params, const ChunkingPolicy& policy) {
  if (!items.is_array()) throw UsageError("parallel map: items must be an array");
  MapOutput out;
  const std::size_t n = items.size();
  if (n == 0) return out;
  const int workers = size();
  const auto chunks = make_chunks(n, static_cast<std::size_t>(workers), policy);

  struct Retry {
    std::size_t chunk;
    int avoid;
  };
  struct InFlight {
    std::size_t chunk;
    std::int64_t dispatched_ns;
  };
  std::vector<std::deque<std::size_t>> dealt(workers);
  std::deque<std::size_t> fresh;
  std::deque<Retry> retries;
  std::vector<std::optional<InFlight>> in_flight(workers);
  std::vector<int> failures(chunks.size(), 0);
  std::vector<json> chunk_results(chunks.size());
  std::size_t completed = 0;
  std::optional<std::pair<std::size_t, std::string>> fatal;

  if (policy.mode == ChunkingMode::static_chunks) {
    for (const auto& c : chunks) {
      const int w = static_cast<int>(c.chunk_id);
      if (backend_->alive(w))
        dealt[w].push_back(c.chunk_id);
      else
        retries.push_back({c.chunk_id, w});
    }
  } else {
    for (const auto& c : chunks) fresh.push_back(c.chunk_id);
  }

  auto next_for = [&](int w) -> std::optional<std::size_t> {
    if (!dealt[w].empty()) {
      auto c = dealt[w].front();
      dealt[w].pop_front();
      return c;
    }
    for (auto it = retries.begin(); it != retries.end(); ++it) {
      if (it->avoid != w || !backend_->alive(it->avoid) || live_workers() == 1) {
        auto c = it->chunk;
        retries.erase(it);
        return c;
      }
    }
    if (!fresh.empty()) {
      auto c = fresh.front();
      fresh.pop_front();
      return c;
    }
    return std::nullopt;
  };

  auto task_body = [&](std::size_t c) {
    json slice = json::array();
    for (auto i = chunks[c].begin; i < chunks[c].end; ++i) slice.push_back(items[i]);
    return json{{"chunk_id", c}, {"task", task}, {"params", params}, {"items", std::move(slice)}};
  };

  for (;;) {
    if (!fatal) {
      for (int w = 0; w < workers; ++w) {
        if (!backend_->alive(w) || in_flight[w]) continue;
        if (auto c = next_for(w)) {
          in_flight[w] = InFlight{*c, monotonic_ns()};
          backend_->dispatch(w, task_body(*c));
        }
      }
    }
    const bool busy = std::any_of(in_flight.begin(), in_flight.end(), [](const auto& f) { return f.has_value(); });
    if (!busy) {
      if (fatal || completed == chunks.size()) break;
      std::size_t stuck = retries.empty() ? (fresh.empty() ? 0 : fresh.front()) : retries.front().chunk;
      fatal = {stuck, "no live workers left"};
      break;
    }

    Event ev = backend_->wait();
    if (ev.worker < 0 || ev.worker >= workers || !in_flight[ev.worker]) continue;
    const auto flight = *in_flight[ev.worker];
    in_flight[ev.worker].reset();
    const auto c = flight.chunk;

    if (ev.kind == Event::Kind::result) {
      const auto* results = ev.body.contains("results") ? &ev.body["results"] : nullptr;
      if (ev.body.value("chunk_id", std::size_t{0}) == c && results && results->is_array() &&
          results->size() == chunks[c].size()) {
        auto rec = task_record_from_json(ev.body.at("record"));
        rec.worker_id = ev.worker;
        rec.chunk_id = c;
        out.records.push_back(rec);
        chunk_results[c] = std::move(*results);
        ++completed;
        continue;
      }
      ev.kind = Event::Kind::error;
      ev.message = "malformed RESULT for chunk " + std::to_string(c);
    }

    TaskRecord rec;
    if (ev.body.is_object() && ev.body.contains("record")) {
      rec = task_record_from_json(ev.body["record"]);
    } else {
      rec.t_start_ns = flight.dispatched_ns;
      rec.t_end_ns = monotonic_ns();
      rec.item_count = chunks[c].size();
    }
    rec.worker_id = ev.worker;
    rec.chunk_id = c;
    rec.status = TaskStatus::failed;
    out.records.push_back(rec);
    log_warn("chunk ", c, " of task ", task, " failed on worker ", ev.worker, ": ", ev.message);
    if (++failures[c] >= 2) {
      if (!fatal) fatal = {c, ev.message};
    } else {
      retries.push_back({c, ev.worker});
    }
  }

  if (fatal) {
    throw ParallelMapError("task '" + task + "' failed on chunk " + std::to_string(fatal->first) + ": " +
                               fatal->second,
                           fatal->first, std::move(out.records));
  }
  for (auto& r : chunk_results)
    for (auto& v : r) out.results.push_back(std::move(v));
  return out;
}

// ------------------------------------------------------------------ worker

int run_worker(int fd, const TaskRegistry& registry, std::optional<int> requested_id,
               std::chrono::milliseconds handshake_timeout) {
  try {
    wire::send_frame(fd, wire::FrameType::hello,
                     {{"protocol_version", wire::protocol_version}, {"worker_id", requested_id.value_or(-1)}});
    auto ack = wire::receive_frame(fd, handshake_timeout);
    if (!ack) return 1;
    if (ack->type == wire::FrameType::error) {
      log_message(LogLevel::error, "coordinator rejected worker: " + ack->body.value("error", std::string("?")));
      return 3;
    }
    if (ack->type != wire::FrameType::hello) return 1;
    WorkerContext context(ack->body.at("worker_id").get<int>(), ack->body.value("cores_per_worker", 1));
    for (;;) {
      auto frame = wire::receive_frame(fd);
      if (!frame || frame->type == wire::FrameType::shutdown) return 0;
      if (frame->type != wire::FrameType::task) return 1;
      bool ok = false;
      auto reply = execute_task(registry, frame->body, context, ok);
      wire::send_frame(fd, ok ? wire::FrameType::result : wire::FrameType::error, reply);
    }
  } catch (const std::exception& e) {
    log_message(LogLevel::error, std::string("worker: ") + e.what());
    return 1;
  }
}

int connect_and_run_worker(const std::string& host_port, const TaskRegistry& registry,
                           std::optional<int> requested_id, std::chrono::milliseconds timeout) {
  auto addr = resolve_ipv4(host_port);
  auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) throw Error(std::string("socket: ") + std::strerror(errno));
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) {
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      int rc = run_worker(fd, registry, requested_id, timeout);
      ::close(fd);
      return rc;
    }
    ::close(fd);
    if (std::chrono::steady_clock::now() >= deadline)
      throw HandshakeError("could not connect to coordinator at " + host_port);
    std::this_thread::sleep_for(50ms);
  }
}

}  // namespace gcontext
