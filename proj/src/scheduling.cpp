#include "gcontext/scheduling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gcontext {

std::uint64_t SplitMix64::next() noexcept {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ScheduleResult simulate_schedule(std::span<const double> task_times, std::size_t workers,
                                 const ChunkingPolicy& policy) {
  if (workers == 0) throw UsageError("simulate_schedule: workers must be >= 1");
  ScheduleResult result;
  result.policy = policy;
  result.worker_busy.assign(workers, 0.0);
  const auto chunks = make_chunks(task_times.size(), workers, policy);
  auto cost = [&](const TaskChunk& c) {
    double s = 0.0;
    for (auto i = c.begin; i < c.end; ++i) s += task_times[i];
    return s;
  };
  std::vector<double> clock(workers, 0.0);
  if (policy.mode == ChunkingMode::static_chunks) {
    for (const auto& c : chunks) clock[c.chunk_id] += cost(c);
  } else {
    for (const auto& c : chunks) {
      auto w = static_cast<std::size_t>(std::min_element(clock.begin(), clock.end()) - clock.begin());
      clock[w] += cost(c);
    }
  }
  result.worker_busy = clock;
  result.makespan = clock.empty() ? 0.0 : *std::max_element(clock.begin(), clock.end());
  return result;
}

std::vector<ScheduleResult> bench_scheduling(std::span<const double> task_times, std::size_t workers,
                                             std::span<const ChunkingPolicy> policies) {
  std::vector<ScheduleResult> out;
  for (const auto& p : policies) out.push_back(simulate_schedule(task_times, workers, p));
  return out;
}

std::vector<double> uniform_task_times(std::size_t n, double value) { return std::vector<double>(n, value); }

std::vector<double> heavy_tailed_task_times(std::size_t n, double heavy_fraction, double heavy_share,
                                            std::uint64_t seed, double total) {
  std::vector<double> times(n, 0.0);
  if (n == 0) return times;
  auto heavy = static_cast<std::size_t>(std::llround(heavy_fraction * static_cast<double>(n)));
  heavy = std::clamp<std::size_t>(heavy, 1, n);
  const auto light = n - heavy;
  const double heavy_each = total * heavy_share / static_cast<double>(heavy);
  const double light_each = light ? total * (1.0 - heavy_share) / static_cast<double>(light) : 0.0;
  // Fisher-Yates over positions picks which tasks are heavy.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  for (std::size_t i = 0; i < n; ++i) times[order[i]] = i < heavy ? heavy_each : light_each;
  return times;
}

std::vector<double> pareto_task_times(std::size_t n, double alpha, std::uint64_t seed) {
  std::vector<double> times(n);
  SplitMix64 rng(seed);
  for (auto& t : times) t = std::pow(1.0 - rng.uniform(), -1.0 / alpha);
  return times;
}

}  // namespace gcontext
