#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gcontext/executor.hpp"

namespace gcontext {

/// Outcome of replaying one chunking policy on the virtual clock.
struct ScheduleResult {
  ChunkingPolicy policy;
  double makespan = 0.0;
  std::vector<double> worker_busy;  // total task time per worker
};

/// Deterministic discrete-event replay of the executor's dealing rules.
/// Static: chunk i runs on worker i. Dynamic: the earliest idle worker
/// (lowest id on ties) pulls the next chunk. Communication is free.
ScheduleResult simulate_schedule(std::span<const double> task_times, std::size_t workers,
                                 const ChunkingPolicy& policy);

std::vector<ScheduleResult> bench_scheduling(std::span<const double> task_times, std::size_t workers,
                                             std::span<const ChunkingPolicy> policies);

/// Task-time generators for the bench command. All are seeded and
/// platform independent (splitmix64 under the hood).
std::vector<double> uniform_task_times(std::size_t n, double value);

/// `heavy_fraction` of the tasks (placed at random positions) carry
/// `heavy_share` of the total time; the rest share the remainder equally.
std::vector<double> heavy_tailed_task_times(std::size_t n, double heavy_fraction, double heavy_share,
                                            std::uint64_t seed, double total = 1000.0);

/// Pareto(alpha) samples scaled to unit minimum.
std::vector<double> pareto_task_times(std::size_t n, double alpha, std::uint64_t seed);

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() noexcept;
  /// Uniform in [0, 1).
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::uint64_t below(std::uint64_t bound) noexcept { return next() % bound; }

 private:
  std::uint64_t state_;
};

}  // namespace gcontext
